//! Real functions on closed intervals, sup and C^k norms, and the test
//! corpus (dense-subspace generators and adversarial witnesses) shared by
//! the quadrature, differencing, interpolation and Monte Carlo modules.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Smoothness sentinel for functions with continuous derivatives of every order.
pub const SMOOTHNESS_UNBOUNDED: usize = usize::MAX;

/// Default sample count for sup-norm estimation.
pub const DEFAULT_SUP_RESOLUTION: usize = 4096;

/// Default x-tolerance for golden-section refinement of local maxima.
pub const DEFAULT_REFINE_TOL: f64 = 1e-12;

/// A closed interval [a, b] with finite endpoints and a < b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    /// Containment with a few ulps of slack so grid endpoints survive roundoff.
    pub fn contains(&self, x: f64) -> bool {
        let slack = 4.0 * f64::EPSILON * (1.0 + self.a.abs().max(self.b.abs()));
        x >= self.a - slack && x <= self.b + slack
    }

    pub fn covers(&self, other: &Interval) -> bool {
        self.contains(other.a) && self.contains(other.b)
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval> {
        Interval::new(self.a.max(other.a), self.b.min(other.b))
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An evaluable real function on a closed interval, with optional exact
/// integral and an optional chain of exact derivatives.
///
/// Values are immutable after construction and evaluators are pure, so a
/// function may be evaluated concurrently without synchronization.
#[derive(Clone)]
pub struct ScalarFunction {
    id: String,
    domain: Interval,
    evaluator: Evaluator,
    smoothness: usize,
    exact_integral: Option<f64>,
    exact_derivative: Option<Arc<ScalarFunction>>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("smoothness", &self.smoothness)
            .field("exact_integral", &self.exact_integral)
            .field("has_derivative", &self.exact_derivative.is_some())
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(
        id: impl Into<String>,
        domain: Interval,
        smoothness: usize,
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            domain,
            evaluator: Arc::new(evaluator),
            smoothness,
            exact_integral: None,
            exact_derivative: None,
        }
    }

    pub fn with_integral(mut self, integral: f64) -> Self {
        self.exact_integral = Some(integral);
        self
    }

    pub fn with_derivative(mut self, derivative: ScalarFunction) -> Self {
        self.exact_derivative = Some(Arc::new(derivative));
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn smoothness(&self) -> usize {
        self.smoothness
    }

    pub fn exact_integral(&self) -> Option<f64> {
        self.exact_integral
    }

    pub fn exact_derivative(&self) -> Option<&ScalarFunction> {
        self.exact_derivative.as_deref()
    }

    /// Evaluate inside the domain; rejects points outside and non-finite results.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain {
                id: self.id.clone(),
                x,
                a: self.domain.a,
                b: self.domain.b,
            });
        }
        let y = (self.evaluator)(x);
        if !y.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                id: self.id.clone(),
                x,
            });
        }
        Ok(y)
    }

    /// Evaluator without the domain check, for callers that construct their
    /// own in-domain grids. Still rejects non-finite values.
    pub(crate) fn eval_unchecked(&self, x: f64) -> Result<f64> {
        let y = (self.evaluator)(x);
        if !y.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                id: self.id.clone(),
                x,
            });
        }
        Ok(y)
    }

    /// Length of the exact-derivative chain hanging off this function.
    pub fn derivative_chain_len(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let Some(d) = cur.exact_derivative() {
            n += 1;
            cur = d;
        }
        n
    }

    /// αf + βg on the intersection of the two domains. The exact integral is
    /// combined only when the domains coincide; derivative chains are
    /// combined as far as both sides carry them.
    pub fn linear_combination(alpha: f64, f: &ScalarFunction, beta: f64, g: &ScalarFunction) -> Result<ScalarFunction> {
        let domain = f.domain.intersect(&g.domain)?;
        let fe = f.evaluator.clone();
        let ge = g.evaluator.clone();
        let mut out = ScalarFunction::new(
            format!("combo({}*{} + {}*{})", alpha, f.id, beta, g.id),
            domain,
            f.smoothness.min(g.smoothness),
            move |x| alpha * fe(x) + beta * ge(x),
        );
        if f.domain == g.domain {
            if let (Some(fi), Some(gi)) = (f.exact_integral, g.exact_integral) {
                out.exact_integral = Some(alpha * fi + beta * gi);
            }
        }
        if let (Some(fd), Some(gd)) = (f.exact_derivative(), g.exact_derivative()) {
            out.exact_derivative = Some(Arc::new(Self::linear_combination(alpha, fd, beta, gd)?));
        }
        Ok(out)
    }
}

/// How a norm value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Closed-form or certificate value.
    Exact,
    /// Certified lower bound (e.g. a witness evaluation).
    LowerBound,
    /// Max over a refined sample grid; a lower bound of the true sup by construction.
    Sampled,
}

/// A norm value with its provenance and the sampling configuration used.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub kind: NormKind,
    pub grid_points: usize,
    pub refinement_tolerance: f64,
}

impl NormEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            kind: NormKind::Exact,
            grid_points: 0,
            refinement_tolerance: 0.0,
        }
    }
}

/// Golden-section search for a local maximum of `f` on [lo, hi], to an
/// x-width of `tol`. Returns the best (x, f(x)) seen.
pub(crate) fn golden_max(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    f: &dyn Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    if f1 >= f2 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

/// Chebyshev-clustered sample grid on [a, b]: densest at the endpoints.
fn chebyshev_grid(interval: Interval, resolution: usize) -> Vec<f64> {
    let (a, b) = (interval.a, interval.b);
    let half = 0.5 * (b - a);
    (0..resolution)
        .map(|j| {
            let theta = PI * j as f64 / (resolution - 1) as f64;
            (a + half * (1.0 - theta.cos())).clamp(a, b)
        })
        .collect()
}

/// Sup norm of `f` over its domain: the max of |f| over a Chebyshev-clustered
/// grid of `resolution` points, with each local maximum refined by bracketed
/// golden-section search. The result is a lower bound of the true sup
/// (kind = sampled).
pub fn sup_norm(f: &ScalarFunction, resolution: usize) -> Result<NormEstimate> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "sup_norm needs resolution >= 2, got {resolution}"
        )));
    }
    let grid = chebyshev_grid(f.domain, resolution);
    let abs_f = |x: f64| f.eval_unchecked(x).map(f64::abs);
    let vals: Vec<f64> = grid.iter().map(|&x| abs_f(x)).collect::<Result<_>>()?;

    let mut best = 0.0f64;
    for v in &vals {
        best = best.max(*v);
    }
    let tol = DEFAULT_REFINE_TOL * f.domain.len().max(1.0);
    for j in 0..vals.len() {
        let is_local_max = (j == 0 || vals[j] >= vals[j - 1])
            && (j + 1 == vals.len() || vals[j] >= vals[j + 1]);
        if !is_local_max {
            continue;
        }
        let lo = if j == 0 { grid[0] } else { grid[j - 1] };
        let hi = if j + 1 == vals.len() { grid[j] } else { grid[j + 1] };
        if hi > lo {
            let (_, fx) = golden_max(lo, hi, tol, &abs_f)?;
            best = best.max(fx);
        }
    }
    Ok(NormEstimate {
        value: best,
        kind: NormKind::Sampled,
        grid_points: resolution,
        refinement_tolerance: tol,
    })
}

/// C^k norm: sum of the sup norms of f, f', ..., f^(k). Requires the exact
/// derivative chain to depth k.
pub fn ck_norm(f: &ScalarFunction, k: usize, resolution: usize) -> Result<NormEstimate> {
    let have = f.derivative_chain_len();
    if have < k {
        return Err(Error::MissingDerivativeChain { have, need: k });
    }
    let mut total = 0.0;
    let mut grid_points = 0;
    let mut cur = f;
    for i in 0..=k {
        let est = sup_norm(cur, resolution)?;
        total += est.value;
        grid_points = est.grid_points;
        if i < k {
            cur = cur.exact_derivative().expect("chain length checked");
        }
    }
    Ok(NormEstimate {
        value: total,
        kind: NormKind::Sampled,
        grid_points,
        refinement_tolerance: DEFAULT_REFINE_TOL * f.domain.len().max(1.0),
    })
}

/// Runge's function 1/(1 + 25x²) on [-1, 1], with exact integral
/// (2/5)·arctan(5) and exact first derivative.
pub fn make_runge() -> ScalarFunction {
    let domain = Interval::new(-1.0, 1.0).expect("static interval");
    let derivative = ScalarFunction::new("runge'", domain, SMOOTHNESS_UNBOUNDED, |x| {
        let d = 1.0 + 25.0 * x * x;
        -50.0 * x / (d * d)
    });
    ScalarFunction::new("runge", domain, SMOOTHNESS_UNBOUNDED, |x| {
        1.0 / (1.0 + 25.0 * x * x)
    })
    .with_integral(0.4 * 5f64.atan())
    .with_derivative(derivative)
}

fn scaled_monomial(coeff: f64, degree: usize, domain: Interval, id: String) -> ScalarFunction {
    let exact = coeff * (domain.b.powi(degree as i32 + 1) - domain.a.powi(degree as i32 + 1))
        / (degree as f64 + 1.0);
    let mut f = ScalarFunction::new(id, domain, SMOOTHNESS_UNBOUNDED, move |x| {
        coeff * x.powi(degree as i32)
    })
    .with_integral(exact);
    if degree > 0 {
        f = f.with_derivative(scaled_monomial(
            coeff * degree as f64,
            degree - 1,
            domain,
            format!("{}*x^{}", coeff * degree as f64, degree - 1),
        ));
    }
    f
}

/// x^d on the given domain, with exact integral and the full derivative chain.
pub fn make_monomial(degree: usize, domain: Interval) -> ScalarFunction {
    scaled_monomial(1.0, degree, domain, format!("monomial:{degree}"))
}

/// Continuous piecewise-linear interpolant of the knots; the exact integral
/// is the trapezoid sum over the knots. Knot abscissae must be strictly
/// increasing.
pub fn make_piecewise_linear(knots: &[(f64, f64)]) -> Result<ScalarFunction> {
    if knots.len() < 2 {
        return Err(Error::InvalidArgument(
            "piecewise linear needs at least 2 knots".into(),
        ));
    }
    for w in knots.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::InvalidArgument(format!(
                "piecewise-linear knots must be strictly increasing in x: {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    let domain = Interval::new(knots[0].0, knots[knots.len() - 1].0)?;
    let integral: f64 = knots
        .windows(2)
        .map(|w| 0.5 * (w[1].1 + w[0].1) * (w[1].0 - w[0].0))
        .sum();
    let pts: Vec<(f64, f64)> = knots.to_vec();
    let id = format!(
        "pl:{}",
        pts.iter()
            .map(|(x, y)| format!("{x},{y}"))
            .collect::<Vec<_>>()
            .join(";")
    );
    Ok(ScalarFunction::new(id, domain, 0, move |x| {
        // clamp at the ends, linear interpolation between bracketing knots
        if x <= pts[0].0 {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let mut idx = match pts.binary_search_by(|p| p.0.partial_cmp(&x).unwrap()) {
            Ok(i) => return pts[i].1,
            Err(i) => i,
        };
        idx = idx.clamp(1, pts.len() - 1);
        let (x0, y0) = pts[idx - 1];
        let (x1, y1) = pts[idx];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    })
    .with_integral(integral))
}

/// The oscillatory witness g_h(x) = sin(2πx/h), with sup norm 1 and exact
/// derivative (2π/h)·cos(2πx/h). Requires h in (0, 1).
pub fn make_sine_probe(h: f64, domain: Interval) -> Result<ScalarFunction> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sine probe requires h in (0, 1), got {h}"
        )));
    }
    let omega = 2.0 * PI / h;
    let second = ScalarFunction::new(
        format!("sine-probe:{h}''"),
        domain,
        SMOOTHNESS_UNBOUNDED,
        move |x| -omega * omega * (omega * x).sin(),
    );
    let first = ScalarFunction::new(
        format!("sine-probe:{h}'"),
        domain,
        SMOOTHNESS_UNBOUNDED,
        move |x| omega * (omega * x).cos(),
    )
    .with_derivative(second);
    Ok(ScalarFunction::new(
        format!("sine-probe:{h}"),
        domain,
        SMOOTHNESS_UNBOUNDED,
        move |x| (omega * x).sin(),
    )
    .with_derivative(first))
}

/// sin(x) on [0, 1] with a four-deep exact derivative chain and exact integral.
pub fn make_sine() -> ScalarFunction {
    fn level(k: usize, depth: usize, domain: Interval) -> ScalarFunction {
        // d/dx sin(x + kπ/2) = sin(x + (k+1)π/2)
        let phase = k as f64 * PI / 2.0;
        let id = match k {
            0 => "sin".to_string(),
            _ => format!("sin^({k})"),
        };
        let integral = -(domain.b + phase).cos() + (domain.a + phase).cos();
        let mut f = ScalarFunction::new(id, domain, SMOOTHNESS_UNBOUNDED, move |x| {
            (x + phase).sin()
        })
        .with_integral(integral);
        if depth > 0 {
            f = f.with_derivative(level(k + 1, depth - 1, domain));
        }
        f
    }
    let domain = Interval::new(0.0, 1.0).expect("static interval");
    level(0, 4, domain)
}

/// x²·sin(1/x) on [0, 1] (0 at the origin): differentiable everywhere with a
/// bounded derivative, but the derivative is not continuous at 0, so its
/// forward-difference sup error does not vanish as h → 0. Used as the
/// non-convergence witness in the sup-norm differencing audit.
pub fn make_oscillator() -> ScalarFunction {
    let domain = Interval::new(0.0, 1.0).expect("static interval");
    let derivative = ScalarFunction::new("osc'", domain, 0, |x| {
        if x == 0.0 {
            0.0
        } else {
            2.0 * x * (1.0 / x).sin() - (1.0 / x).cos()
        }
    });
    ScalarFunction::new("osc", domain, 1, |x| {
        if x == 0.0 {
            0.0
        } else {
            x * x * (1.0 / x).sin()
        }
    })
    .with_derivative(derivative)
}

/// Resolve a corpus function from its string id:
/// `runge`, `sin`, `osc`, `monomial:<d>`, `pl:<x,y;x,y;...>`, `sine-probe:<h>`.
pub fn function_by_id(id: &str) -> Result<ScalarFunction> {
    if id == "runge" {
        return Ok(make_runge());
    }
    if id == "sin" {
        return Ok(make_sine());
    }
    if id == "osc" {
        return Ok(make_oscillator());
    }
    if let Some(d) = id.strip_prefix("monomial:") {
        let degree: usize = d
            .parse()
            .map_err(|_| Error::UnknownFunctionId(id.to_string()))?;
        let domain = Interval::new(0.0, 1.0)?;
        return Ok(make_monomial(degree, domain));
    }
    if let Some(h) = id.strip_prefix("sine-probe:") {
        let h: f64 = h
            .parse()
            .map_err(|_| Error::UnknownFunctionId(id.to_string()))?;
        let domain = Interval::new(0.0, 1.0)?;
        return make_sine_probe(h, domain);
    }
    if let Some(spec) = id.strip_prefix("pl:") {
        let mut knots = Vec::new();
        for pair in spec.split(';') {
            let mut it = pair.split(',');
            let x = it.next().and_then(|s| s.trim().parse::<f64>().ok());
            let y = it.next().and_then(|s| s.trim().parse::<f64>().ok());
            match (x, y) {
                (Some(x), Some(y)) => knots.push((x, y)),
                _ => return Err(Error::UnknownFunctionId(id.to_string())),
            }
        }
        return make_piecewise_linear(&knots);
    }
    Err(Error::UnknownFunctionId(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rejects_bad_endpoints() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn sup_norm_zero_function() {
        let f = ScalarFunction::new("zero", Interval::new(0.0, 1.0).unwrap(), 0, |_| 0.0);
        let est = sup_norm(&f, 16).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.kind, NormKind::Sampled);
    }

    #[test]
    fn sup_norm_sine_2pi() {
        let f = ScalarFunction::new("sin2pi", Interval::new(0.0, 1.0).unwrap(), 0, |x| {
            (2.0 * PI * x).sin()
        });
        let est = sup_norm(&f, 64).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9, "got {}", est.value);
    }

    #[test]
    fn sup_norm_runge_peak() {
        let est = sup_norm(&make_runge(), DEFAULT_SUP_RESOLUTION).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12, "got {}", est.value);
    }

    #[test]
    fn sup_norm_rejects_non_finite() {
        let f = ScalarFunction::new("bad", Interval::new(0.0, 1.0).unwrap(), 0, |x| {
            if x > 0.5 {
                f64::NAN
            } else {
                1.0
            }
        });
        let err = sup_norm(&f, 32).unwrap_err();
        assert!(matches!(err, Error::NonFiniteEvaluation { .. }));
    }

    #[test]
    fn ck_norm_linear() {
        let f = make_monomial(1, Interval::new(0.0, 1.0).unwrap());
        let est = ck_norm(&f, 1, 256).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12, "got {}", est.value);
    }

    #[test]
    fn ck_norm_sine_on_0_pi() {
        let domain = Interval::new(0.0, PI).unwrap();
        let d = ScalarFunction::new("cos", domain, SMOOTHNESS_UNBOUNDED, f64::cos);
        let f = ScalarFunction::new("sin0pi", domain, SMOOTHNESS_UNBOUNDED, f64::sin)
            .with_derivative(d);
        let est = ck_norm(&f, 1, 1024).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9, "got {}", est.value);
    }

    #[test]
    fn ck_norm_constant_any_k() {
        let domain = Interval::new(0.0, 1.0).unwrap();
        let c2 = ScalarFunction::new("c''", domain, SMOOTHNESS_UNBOUNDED, |_| 0.0);
        let c1 = ScalarFunction::new("c'", domain, SMOOTHNESS_UNBOUNDED, |_| 0.0).with_derivative(c2);
        let f = ScalarFunction::new("c", domain, SMOOTHNESS_UNBOUNDED, |_| -3.5).with_derivative(c1);
        let est = ck_norm(&f, 2, 64).unwrap();
        assert!((est.value - 3.5).abs() < 1e-14);
    }

    #[test]
    fn ck_norm_missing_chain_errors() {
        let f = ScalarFunction::new("plain", Interval::new(0.0, 1.0).unwrap(), 3, |x| x);
        assert!(matches!(
            ck_norm(&f, 1, 64).unwrap_err(),
            Error::MissingDerivativeChain { have: 0, need: 1 }
        ));
    }

    #[test]
    fn ck_norm_order_zero_equals_sup_norm() {
        let f = make_runge();
        let a = ck_norm(&f, 0, 512).unwrap();
        let b = sup_norm(&f, 512).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn runge_values_and_integral() {
        let f = make_runge();
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert!((f.eval(1.0).unwrap() - 1.0 / 26.0).abs() < 1e-16);
        assert!((f.exact_integral().unwrap() - 0.549_360_306_778_006_4).abs() < 1e-15);
    }

    #[test]
    fn monomial_integrals() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        assert_eq!(make_monomial(0, unit).exact_integral().unwrap(), 1.0);
        assert!((make_monomial(2, unit).exact_integral().unwrap() - 1.0 / 3.0).abs() < 1e-16);
        let sym = Interval::new(-1.0, 1.0).unwrap();
        assert!((make_monomial(8, sym).exact_integral().unwrap() - 2.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn monomial_integral_matches_midpoint_oracle() {
        // Independent oracle: 10^6-panel midpoint rule.
        fn midpoint_integral(f: &ScalarFunction) -> f64 {
            let n = 1_000_000usize;
            let (a, b) = (f.domain().a(), f.domain().b());
            let h = (b - a) / n as f64;
            let mut acc = crate::kahan::KahanSum::new();
            for i in 0..n {
                let x = a + (i as f64 + 0.5) * h;
                acc.add(f.eval(x).unwrap());
            }
            acc.total() * h
        }
        for domain in [Interval::new(0.0, 1.0).unwrap(), Interval::new(-1.0, 2.0).unwrap()] {
            for d in 0..=12usize {
                let f = make_monomial(d, domain);
                let oracle = midpoint_integral(&f);
                let exact = f.exact_integral().unwrap();
                let rel = (oracle - exact).abs() / exact.abs().max(1e-300);
                assert!(rel < 1e-8, "d={d} domain={domain} rel={rel}");
            }
        }
    }

    #[test]
    fn piecewise_linear_identity_and_cancellation() {
        let f = make_piecewise_linear(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(f.eval(0.25).unwrap(), 0.25);
        assert_eq!(f.exact_integral().unwrap(), 0.5);

        let g = make_piecewise_linear(&[(0.0, 1.0), (0.5, -1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(g.exact_integral().unwrap(), 0.0);

        let c = make_piecewise_linear(&[(0.0, 2.5), (2.0, 2.5)]).unwrap();
        assert_eq!(c.exact_integral().unwrap(), 5.0);
    }

    #[test]
    fn piecewise_linear_rejects_non_monotone() {
        assert!(make_piecewise_linear(&[(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(make_piecewise_linear(&[(1.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn sine_probe_values() {
        let domain = Interval::new(0.0, 1.0).unwrap();
        let h = 0.1;
        let g = make_sine_probe(h, domain).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        let sup = sup_norm(&g, DEFAULT_SUP_RESOLUTION).unwrap();
        assert!((sup.value - 1.0).abs() < 1e-12, "sup = {}", sup.value);
        let dsup = sup_norm(g.exact_derivative().unwrap(), DEFAULT_SUP_RESOLUTION).unwrap();
        assert!(
            (dsup.value - 2.0 * PI / h).abs() < 1e-9 * (2.0 * PI / h),
            "derivative sup = {}",
            dsup.value
        );
    }

    #[test]
    fn sine_probe_rejects_h_outside_unit() {
        let domain = Interval::new(0.0, 1.0).unwrap();
        assert!(make_sine_probe(0.0, domain).is_err());
        assert!(make_sine_probe(1.0, domain).is_err());
        assert!(make_sine_probe(-0.5, domain).is_err());
    }

    #[test]
    fn function_ids_resolve() {
        for id in ["runge", "sin", "osc", "monomial:3", "sine-probe:0.25", "pl:0,0;1,1"] {
            let f = function_by_id(id).unwrap();
            assert!(f.eval(f.domain().midpoint()).is_ok(), "{id}");
        }
        assert!(function_by_id("nope").is_err());
        assert!(function_by_id("monomial:x").is_err());
    }

    #[test]
    fn linear_combination_evaluates() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        let f = make_monomial(2, unit);
        let g = make_monomial(1, unit);
        let c = ScalarFunction::linear_combination(2.0, &f, -3.0, &g).unwrap();
        assert!((c.eval(0.5).unwrap() - (2.0 * 0.25 - 3.0 * 0.5)).abs() < 1e-15);
        assert!((c.exact_integral().unwrap() - (2.0 / 3.0 - 1.5)).abs() < 1e-15);
    }

    #[test]
    fn sup_norm_known_bounds_not_exceeded() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        let cases: Vec<(ScalarFunction, f64)> = vec![
            (make_runge(), 1.0),
            (make_sine(), 1.0),
            (make_monomial(5, unit), 1.0),
            (make_sine_probe(0.3, unit).unwrap(), 1.0),
        ];
        for (f, bound) in cases {
            let est = sup_norm(&f, DEFAULT_SUP_RESOLUTION).unwrap();
            assert!(
                est.value <= bound + 1e-12,
                "{} exceeded bound: {} > {}",
                f.id(),
                est.value,
                bound
            );
        }
    }
}
