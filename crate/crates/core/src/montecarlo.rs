//! Sample-mean Monte Carlo integration M_n(f) = (1/n) Σ f(Xᵢ)/g(Xᵢ) with a
//! user-chosen positive pdf g, seeded reproducible sampling, and the 1/m
//! stability certificate.
//!
//! Probability-one statements are operationalized as fixed seed panels:
//! within one seed the stream is strictly sequential (running-mean
//! semantics), so identical (pdf, seed, n) reproduces the identical estimate
//! bit for bit. Distinct seeds may run concurrently.

use crate::error::{Error, Result};
use crate::funcspace::{Interval, NormEstimate, ScalarFunction};
use crate::kahan::{KahanSum, RunningMean};
use crate::rng::{Xoshiro256PlusPlus, RNG_ALGORITHM};
use serde::Serialize;
use std::sync::Arc;

/// Grid size for the construction-time spot check g ≥ m.
const LOWER_BOUND_GRID: usize = 4096;
/// Panels for the construction-time normalization check ∫g = 1.
const NORMALIZATION_PANELS: usize = 1 << 16;
/// Table size for the numerically integrated CDF.
const CDF_TABLE_PANELS: usize = 1 << 16;
/// Bisection tolerance (in x) when inverting the numeric CDF.
const BISECTION_TOL: f64 = 1e-10;

enum Sampler {
    /// Exact closed-form inverse CDF mapping (0,1) → [a,b].
    InverseCdf(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Bisection against a trapezoid-integrated CDF table.
    Bisection { cdf: Vec<f64> },
}

/// A positive probability density on an interval with a declared lower bound
/// m > 0 and a sampler. Construction verifies normalization against a
/// high-resolution quadrature oracle and spot-checks the lower bound.
pub struct Pdf {
    g: ScalarFunction,
    lower_bound_m: f64,
    sampler: Sampler,
}

impl Pdf {
    /// Density with a closed-form inverse CDF.
    pub fn with_inverse_cdf(
        g: ScalarFunction,
        lower_bound_m: f64,
        inverse_cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let pdf = Self {
            g,
            lower_bound_m,
            sampler: Sampler::InverseCdf(Arc::new(inverse_cdf)),
        };
        pdf.validate()?;
        Ok(pdf)
    }

    /// Density sampled by bisection on the numerically integrated CDF.
    pub fn with_numeric_cdf(g: ScalarFunction, lower_bound_m: f64) -> Result<Self> {
        let domain = g.domain();
        let h = domain.len() / CDF_TABLE_PANELS as f64;
        let mut cdf = Vec::with_capacity(CDF_TABLE_PANELS + 1);
        let mut acc = KahanSum::new();
        cdf.push(0.0);
        let mut prev = g.eval(domain.a())?;
        for i in 1..=CDF_TABLE_PANELS {
            let x = domain.a() + domain.len() * i as f64 / CDF_TABLE_PANELS as f64;
            let cur = g.eval(x)?;
            acc.add(0.5 * (prev + cur) * h);
            cdf.push(acc.total());
            prev = cur;
        }
        let pdf = Self {
            g,
            lower_bound_m,
            sampler: Sampler::Bisection { cdf },
        };
        pdf.validate()?;
        Ok(pdf)
    }

    /// The uniform density 1/(b−a) on the interval, with m = 1/(b−a).
    pub fn uniform(interval: Interval) -> Result<Self> {
        let span = interval.len();
        let g = ScalarFunction::new(
            format!("uniform{interval}"),
            interval,
            crate::funcspace::SMOOTHNESS_UNBOUNDED,
            move |_| 1.0 / span,
        )
        .with_integral(1.0);
        let a = interval.a();
        Self::with_inverse_cdf(g, 1.0 / span, move |u| a + u * span)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower_bound_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pdf lower bound m must be positive, got {}",
                self.lower_bound_m
            )));
        }
        let domain = self.g.domain();
        // spot check g >= m on a fixed grid
        for i in 0..LOWER_BOUND_GRID {
            let x = domain.a() + domain.len() * i as f64 / (LOWER_BOUND_GRID - 1) as f64;
            let gx = self.g.eval(x.clamp(domain.a(), domain.b()))?;
            if gx < self.lower_bound_m {
                return Err(Error::PdfLowerBoundViolated {
                    x,
                    gx,
                    m: self.lower_bound_m,
                });
            }
        }
        // normalization against a high-resolution trapezoid oracle
        let h = domain.len() / NORMALIZATION_PANELS as f64;
        let mut acc = KahanSum::new();
        let mut prev = self.g.eval(domain.a())?;
        for i in 1..=NORMALIZATION_PANELS {
            let x = domain.a() + domain.len() * i as f64 / NORMALIZATION_PANELS as f64;
            let cur = self.g.eval(x.clamp(domain.a(), domain.b()))?;
            acc.add(0.5 * (prev + cur) * h);
            prev = cur;
        }
        let integral = acc.total();
        if (integral - 1.0).abs() > 1e-8 {
            return Err(Error::PdfNotNormalized {
                id: self.g.id().to_string(),
                integral,
            });
        }
        Ok(())
    }

    pub fn g(&self) -> &ScalarFunction {
        &self.g
    }

    pub fn lower_bound_m(&self) -> f64 {
        self.lower_bound_m
    }

    /// Map a uniform u ∈ (0,1) to a sample in the domain.
    fn sample(&self, u: f64) -> f64 {
        let domain = self.g.domain();
        match &self.sampler {
            Sampler::InverseCdf(inv) => inv(u).clamp(domain.a(), domain.b()),
            Sampler::Bisection { cdf } => {
                let total = cdf[cdf.len() - 1];
                let target = u * total;
                let (mut lo, mut hi) = (domain.a(), domain.b());
                let span = domain.len();
                let lookup = |x: f64| -> f64 {
                    let t = (x - domain.a()) / span * CDF_TABLE_PANELS as f64;
                    let i = (t.floor() as usize).min(CDF_TABLE_PANELS - 1);
                    let frac = t - i as f64;
                    cdf[i] + frac * (cdf[i + 1] - cdf[i])
                };
                while hi - lo > BISECTION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if lookup(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// One reproducible Monte Carlo run.
#[derive(Debug, Clone, Serialize)]
pub struct McRun {
    pub pdf_id: String,
    pub seed: u64,
    pub n: usize,
    pub estimate: f64,
    pub rng_algorithm: &'static str,
    /// Running means at requested checkpoints (n, estimate).
    pub trace: Option<Vec<(usize, f64)>>,
}

fn stream_mean(
    f: &ScalarFunction,
    pdf: &Pdf,
    n: usize,
    seed: u64,
    checkpoints: Option<&[usize]>,
) -> Result<(f64, Option<Vec<(usize, f64)>>)> {
    let mut rng = Xoshiro256PlusPlus::from_seed(seed);
    let mut mean = RunningMean::new();
    let mut trace = checkpoints.map(|c| Vec::with_capacity(c.len()));
    let mut next_checkpoint = 0usize;
    for k in 1..=n {
        let x = pdf.sample(rng.next_unit_open());
        let gx = pdf.g.eval(x)?;
        if gx < pdf.lower_bound_m {
            return Err(Error::PdfLowerBoundViolated {
                x,
                gx,
                m: pdf.lower_bound_m,
            });
        }
        mean.push(f.eval(x)? / gx);
        if let (Some(cs), Some(tr)) = (checkpoints, trace.as_mut()) {
            while next_checkpoint < cs.len() && cs[next_checkpoint] == k {
                tr.push((k, mean.mean()));
                next_checkpoint += 1;
            }
        }
    }
    Ok((mean.mean(), trace))
}

/// The sample-mean estimate (1/n) Σ f(Xᵢ)/g(Xᵢ) along the stream determined
/// by `seed`. The function's domain must cover the pdf's.
pub fn sample_mean_estimate(f: &ScalarFunction, pdf: &Pdf, n: usize, seed: u64) -> Result<McRun> {
    if n < 1 {
        return Err(Error::InvalidArgument("need n >= 1 samples".into()));
    }
    if !f.domain().covers(&pdf.g.domain()) {
        return Err(Error::DomainMismatch {
            id: f.id().to_string(),
            a: pdf.g.domain().a(),
            b: pdf.g.domain().b(),
        });
    }
    let (estimate, _) = stream_mean(f, pdf, n, seed, None)?;
    Ok(McRun {
        pdf_id: pdf.g.id().to_string(),
        seed,
        n,
        estimate,
        rng_algorithm: RNG_ALGORITHM,
        trace: None,
    })
}

/// The norm certificate ‖M_n‖ ≤ 1/m, independent of n.
pub fn mc_norm_bound(pdf: &Pdf) -> NormEstimate {
    NormEstimate::exact(1.0 / pdf.lower_bound_m)
}

/// |M_n(f) − M_n(f₀)| on the *same* sample path. Deterministically bounded
/// by (1/m)·‖f − f₀‖_∞.
pub fn pathwise_stability_gap(
    f: &ScalarFunction,
    f0: &ScalarFunction,
    pdf: &Pdf,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("need n >= 1 samples".into()));
    }
    let mut rng = Xoshiro256PlusPlus::from_seed(seed);
    let mut mean_f = RunningMean::new();
    let mut mean_f0 = RunningMean::new();
    for _ in 0..n {
        let x = pdf.sample(rng.next_unit_open());
        let gx = pdf.g.eval(x)?;
        if gx < pdf.lower_bound_m {
            return Err(Error::PdfLowerBoundViolated {
                x,
                gx,
                m: pdf.lower_bound_m,
            });
        }
        mean_f.push(f.eval(x)? / gx);
        mean_f0.push(f0.eval(x)? / gx);
    }
    Ok((mean_f.mean() - mean_f0.mean()).abs())
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub seed: u64,
    pub n: usize,
    pub estimate: f64,
    /// |estimate − exact integral|, when the function carries one.
    pub abs_error: Option<f64>,
}

/// Per-seed running-mean traces over a checkpoint schedule. Each seed is a
/// single path: the estimate at a larger n reuses the same stream prefix.
#[derive(Debug, Clone, Serialize)]
pub struct TraceTable {
    pub rng_algorithm: &'static str,
    pub rows: Vec<TraceRow>,
}

impl TraceTable {
    /// CSV with header `seed,n,estimate,abs_error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,n,estimate,abs_error\n");
        for r in &self.rows {
            let err = r.abs_error.map(|e| e.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", r.seed, r.n, r.estimate, err));
        }
        out
    }
}

/// Run the estimator at every (seed, checkpoint) pair. The schedule must be
/// strictly increasing.
pub fn convergence_trace(
    f: &ScalarFunction,
    pdf: &Pdf,
    schedule: &[usize],
    seeds: &[u64],
) -> Result<TraceTable> {
    if schedule.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "convergence trace needs a nonempty schedule and seed panel".into(),
        ));
    }
    for w in schedule.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(
                "checkpoint schedule must be strictly increasing".into(),
            ));
        }
    }
    let exact = f.exact_integral();
    let n_max = *schedule.last().expect("nonempty");
    let mut rows = Vec::with_capacity(schedule.len() * seeds.len());
    for &seed in seeds {
        let (_, trace) = stream_mean(f, pdf, n_max, seed, Some(schedule))?;
        for (n, estimate) in trace.expect("checkpoints requested") {
            rows.push(TraceRow {
                seed,
                n,
                estimate,
                abs_error: exact.map(|e| (estimate - e).abs()),
            });
        }
    }
    Ok(TraceTable {
        rng_algorithm: RNG_ALGORITHM,
        rows,
    })
}

/// The fixed 64-seed panel used to operationalize probability-one statements.
pub fn default_seed_panel() -> Vec<u64> {
    (1..=64).collect()
}
