//! Discrete operator families from one-dimensional numerical analysis —
//! quadrature rules, sample-mean Monte Carlo integration, finite
//! differences, and polynomial interpolation — together with their
//! stability norms, consistency/convergence evidence, and an audit engine
//! that cross-checks the verdicts against the equivalence pattern
//! "a consistent family is convergent iff it is stable".

pub mod audit;
pub mod dd;
pub mod diffops;
pub mod error;
pub mod funcspace;
pub mod interp;
pub mod kahan;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use funcspace::{Interval, NormEstimate, NormKind, ScalarFunction};
