use thiserror::Error;

/// Errors produced by rule construction, function evaluation and studies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: require finite a < b, got [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("non-finite evaluation at x = {x} (function `{id}`)")]
    NonFiniteEvaluation { id: String, x: f64 },

    #[error("evaluation at x = {x} outside domain [{a}, {b}] of `{id}`")]
    OutsideDomain { id: String, x: f64, a: f64, b: f64 },

    #[error("C^k norm requires k exact derivatives (have {have}, need {need})")]
    MissingDerivativeChain { have: usize, need: usize },

    #[error("domain of `{id}` does not cover the requested interval [{a}, {b}]")]
    DomainMismatch { id: String, a: f64, b: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("rational weight size cap: {requested} nodes exceeds cap {cap}")]
    NodeCapExceeded { requested: usize, cap: usize },

    #[error("Newton iteration for Legendre root {index} did not converge in {iterations} iterations")]
    RootSolverDiverged { index: usize, iterations: usize },

    #[error("pdf lower bound violated: g({x}) = {gx} < m = {m}")]
    PdfLowerBoundViolated { x: f64, gx: f64, m: f64 },

    #[error("pdf `{id}` does not integrate to 1: got {integral}")]
    PdfNotNormalized { id: String, integral: f64 },

    #[error("unknown function id `{0}`")]
    UnknownFunctionId(String),
}

pub type Result<T> = std::result::Result<T, Error>;
