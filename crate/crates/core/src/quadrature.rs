//! Quadrature rules (Newton–Cotes, Gauss–Legendre, composite trapezoid),
//! their application, the exact operator norm Σ|wᵢ|, and a continuous
//! piecewise-linear witness that attains it.
//!
//! Newton–Cotes weights are computed in exact big-rational arithmetic on the
//! normalized interval [0, 1] (the moment/Vandermonde system is hopelessly
//! ill-conditioned in floating point exactly in the large-n regime where the
//! weight mass blows up) and converted to floating point only at the end.

use crate::error::{Error, Result};
use crate::funcspace::{make_piecewise_linear, Interval, NormEstimate, ScalarFunction};
use crate::kahan::KahanSum;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Default cap on Newton–Cotes node counts; rational weight bit-length grows
/// quickly with the node count.
pub const DEFAULT_NODE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFamily {
    NewtonCotes,
    GaussLegendre,
    CompositeTrapezoid,
    Custom,
}

impl RuleFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleFamily::NewtonCotes => "newton_cotes",
            RuleFamily::GaussLegendre => "gauss_legendre",
            RuleFamily::CompositeTrapezoid => "composite_trapezoid",
            RuleFamily::Custom => "custom",
        }
    }
}

/// Nodes and weights for ∫ over `interval` ≈ Σ wᵢ f(xᵢ).
///
/// For rules constructed rationally, `unit_weights` holds the exact weights
/// normalized to [0, 1]; the floating weight is (b − a) · unit weight.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    interval: Interval,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    family: RuleFamily,
    exactness_degree: usize,
    unit_weights: Option<Vec<BigRational>>,
}

impl QuadratureRule {
    fn new_checked(
        family: RuleFamily,
        interval: Interval,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        exactness_degree: usize,
        unit_weights: Option<Vec<BigRational>>,
    ) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "rule needs equal nonzero node and weight counts, got {} and {}",
                nodes.len(),
                weights.len()
            )));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "nodes must be strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if !interval.contains(nodes[0]) || !interval.contains(nodes[nodes.len() - 1]) {
            return Err(Error::InvalidArgument(
                "nodes must lie inside the rule interval".into(),
            ));
        }
        let sum: f64 = weights.iter().collect::<KahanSum>().total();
        let span = interval.len();
        let mass: f64 = weights.iter().map(|w| w.abs()).sum();
        if (sum - span).abs() > 1e-12 * (1.0 + span.abs() + mass) {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to b - a = {span}, got {sum}"
            )));
        }
        Ok(Self {
            interval,
            nodes,
            weights,
            family,
            exactness_degree,
            unit_weights,
        })
    }

    /// A user-supplied rule; validated like the built-in families.
    pub fn custom(
        interval: Interval,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        exactness_degree: usize,
    ) -> Result<Self> {
        Self::new_checked(RuleFamily::Custom, interval, nodes, weights, exactness_degree, None)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn family(&self) -> RuleFamily {
        self.family
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Exact unit-interval weights, when the rule was constructed rationally.
    pub fn unit_weights(&self) -> Option<&[BigRational]> {
        self.unit_weights.as_deref()
    }

    /// Exact Σ|wᵢ| normalized to a unit interval, when available.
    pub fn rational_abs_weight_sum(&self) -> Option<BigRational> {
        self.unit_weights
            .as_ref()
            .map(|ws| ws.iter().map(|w| w.abs()).sum())
    }

    /// Serialize to the stable JSON shape; rational weights additionally emit
    /// num/den strings.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("family".into(), self.family.as_str().into());
        obj.insert(
            "interval".into(),
            serde_json::json!([self.interval.a(), self.interval.b()]),
        );
        obj.insert("nodes".into(), serde_json::json!(self.nodes));
        obj.insert("weights".into(), serde_json::json!(self.weights));
        obj.insert("exactness_degree".into(), self.exactness_degree.into());
        if let Some(ws) = &self.unit_weights {
            let rats: Vec<serde_json::Value> = ws
                .iter()
                .map(|w| {
                    serde_json::json!({
                        "num": w.numer().to_string(),
                        "den": w.denom().to_string(),
                    })
                })
                .collect();
            obj.insert("rational_unit_weights".into(), rats.into());
        }
        serde_json::Value::Object(obj)
    }
}

/// Exact Newton–Cotes weights normalized to [0, 1]: wᵢ on [a, b] is
/// (b − a) times these. Computed by integrating each Lagrange basis
/// polynomial on the integer grid 0..s in big-rational arithmetic.
fn cotes_unit_weights(num_nodes: usize) -> Vec<BigRational> {
    let s = num_nodes - 1; // segments
    let s_int = BigInt::from(s);
    let mut out = Vec::with_capacity(num_nodes);
    for i in 0..num_nodes {
        // expand ∏_{j≠i} (t - j)
        let mut coeffs: Vec<BigInt> = vec![BigInt::one()];
        for j in 0..num_nodes {
            if j == i {
                continue;
            }
            let j_int = BigInt::from(j);
            let mut next = vec![BigInt::zero(); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &j_int;
            }
            coeffs = next;
        }
        // ∫_0^s: Σ c_k s^{k+1}/(k+1)
        let mut integral = BigRational::zero();
        let mut s_pow = s_int.clone();
        for (k, c) in coeffs.iter().enumerate() {
            integral += BigRational::new(c * &s_pow, BigInt::from(k + 1));
            s_pow *= &s_int;
        }
        // ∏_{j≠i} (i - j)
        let mut denom = BigInt::one();
        for j in 0..num_nodes {
            if j != i {
                denom *= BigInt::from(i as i64 - j as i64);
            }
        }
        out.push(integral / BigRational::from(denom) / BigRational::from(s_int.clone()));
    }
    out
}

/// Closed Newton–Cotes rule on equally spaced nodes including both endpoints.
/// Weights come from the exact rational construction; the default node cap is
/// [`DEFAULT_NODE_CAP`].
pub fn newton_cotes_rule(num_nodes: usize, interval: Interval) -> Result<QuadratureRule> {
    newton_cotes_rule_capped(num_nodes, interval, DEFAULT_NODE_CAP)
}

pub fn newton_cotes_rule_capped(
    num_nodes: usize,
    interval: Interval,
    cap: usize,
) -> Result<QuadratureRule> {
    if num_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "Newton-Cotes needs at least 2 nodes, got {num_nodes}"
        )));
    }
    if num_nodes > cap {
        return Err(Error::NodeCapExceeded {
            requested: num_nodes,
            cap,
        });
    }
    let unit = cotes_unit_weights(num_nodes);
    let span = interval.len();
    let weights: Vec<f64> = unit
        .iter()
        .map(|w| span * w.to_f64().expect("rational fits in f64"))
        .collect();
    let s = num_nodes - 1;
    let nodes: Vec<f64> = (0..num_nodes)
        .map(|i| interval.a() + span * i as f64 / s as f64)
        .collect();
    // an even segment count buys one extra degree by symmetry
    let exactness = if s % 2 == 0 { num_nodes } else { num_nodes - 1 };
    QuadratureRule::new_checked(
        RuleFamily::NewtonCotes,
        interval,
        nodes,
        weights,
        exactness,
        Some(unit),
    )
}

/// Legendre P_n and its derivative by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let dp = if (x * x - 1.0).abs() > 1e-30 {
        n as f64 * (x * p - p_prev) / (x * x - 1.0)
    } else {
        // endpoint values never arise for interior roots; keep it defined
        0.5 * (n * (n + 1)) as f64 * if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) }
    };
    (p, dp)
}

/// Gauss–Legendre rule: nodes are the Legendre roots found by Newton
/// iteration from Chebyshev-asymptotic initial guesses, mapped affinely to
/// the interval. All weights are strictly positive; exactness degree is
/// 2·num_nodes − 1.
pub fn gauss_legendre_rule(num_nodes: usize, interval: Interval) -> Result<QuadratureRule> {
    if num_nodes < 1 {
        return Err(Error::InvalidArgument(
            "Gauss-Legendre needs at least 1 node".into(),
        ));
    }
    let n = num_nodes;
    let mut ref_nodes = vec![0.0f64; n];
    let mut ref_weights = vec![0.0f64; n];
    let half_count = n / 2;
    for i in 1..=half_count {
        // largest roots first: guess near cos of a small angle
        let mut t = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, t);
            let step = p / dp;
            t -= step;
            if step.abs() <= 1e-15 * (1.0 + t.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::RootSolverDiverged {
                index: i,
                iterations: 100,
            });
        }
        let (_, dp) = legendre_and_derivative(n, t);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // mirror-symmetric placement
        ref_nodes[n - i] = t;
        ref_weights[n - i] = w;
        ref_nodes[i - 1] = -t;
        ref_weights[i - 1] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_and_derivative(n, 0.0);
        ref_nodes[half_count] = 0.0;
        ref_weights[half_count] = 2.0 / (dp * dp);
    }
    let mid = interval.midpoint();
    let half = 0.5 * interval.len();
    let nodes: Vec<f64> = ref_nodes.iter().map(|t| mid + half * t).collect();
    let weights: Vec<f64> = ref_weights.iter().map(|w| half * w).collect();
    QuadratureRule::new_checked(
        RuleFamily::GaussLegendre,
        interval,
        nodes,
        weights,
        2 * n - 1,
        None,
    )
}

/// Composite trapezoid rule with the given panel count: endpoint weights h/2,
/// interior weights h. Exact on piecewise-linear functions with knots at the
/// nodes (exactness degree 1).
pub fn composite_trapezoid_rule(panels: usize, interval: Interval) -> Result<QuadratureRule> {
    if panels < 1 {
        return Err(Error::InvalidArgument(
            "composite trapezoid needs at least 1 panel".into(),
        ));
    }
    let span = interval.len();
    let h = span / panels as f64;
    let nodes: Vec<f64> = (0..=panels)
        .map(|i| interval.a() + span * i as f64 / panels as f64)
        .collect();
    let weights: Vec<f64> = (0..=panels)
        .map(|i| if i == 0 || i == panels { 0.5 * h } else { h })
        .collect();
    let p = BigInt::from(panels);
    let unit: Vec<BigRational> = (0..=panels)
        .map(|i| {
            if i == 0 || i == panels {
                BigRational::new(BigInt::one(), 2 * &p)
            } else {
                BigRational::new(BigInt::one(), p.clone())
            }
        })
        .collect();
    QuadratureRule::new_checked(
        RuleFamily::CompositeTrapezoid,
        interval,
        nodes,
        weights,
        1,
        Some(unit),
    )
}

/// Apply the rule: Σ wᵢ f(xᵢ) with compensated summation. The function's
/// domain must cover the rule's interval.
pub fn apply(rule: &QuadratureRule, f: &ScalarFunction) -> Result<f64> {
    if !f.domain().covers(&rule.interval) {
        return Err(Error::DomainMismatch {
            id: f.id().to_string(),
            a: rule.interval.a(),
            b: rule.interval.b(),
        });
    }
    let mut acc = KahanSum::new();
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc.add(w * f.eval(*x)?);
    }
    Ok(acc.total())
}

/// The operator norm of the rule as a functional on (C[a,b], ‖·‖_∞):
/// exactly Σ|wᵢ|. Uses the rational weights when the rule carries them.
pub fn operator_norm(rule: &QuadratureRule) -> NormEstimate {
    let value = match rule.rational_abs_weight_sum() {
        Some(mass) => rule.interval.len() * mass.to_f64().expect("rational fits in f64"),
        None => rule.weights.iter().map(|w| w.abs()).collect::<KahanSum>().total(),
    };
    NormEstimate::exact(value)
}

/// A continuous piecewise-linear witness with ‖f‖_∞ = 1 and f(xᵢ) = sign(wᵢ)
/// at every node, so apply(rule, witness) = Σ|wᵢ| exactly: the operator norm
/// is attained on C[a,b]. `margin` sets the fraction of each opposite-sign
/// gap used for the sign transition (node values do not depend on it).
pub fn norm_witness(rule: &QuadratureRule, margin: f64) -> Result<ScalarFunction> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "witness margin must be in (0, 1), got {margin}"
        )));
    }
    let sign = |w: f64| {
        if w > 0.0 {
            1.0
        } else if w < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let first = rule.nodes[0];
    let last = rule.nodes[rule.nodes.len() - 1];
    if rule.interval.a() < first {
        knots.push((rule.interval.a(), sign(rule.weights[0])));
    }
    for i in 0..rule.nodes.len() {
        knots.push((rule.nodes[i], sign(rule.weights[i])));
        if i + 1 < rule.nodes.len() {
            let (s0, s1) = (sign(rule.weights[i]), sign(rule.weights[i + 1]));
            if s0 != s1 {
                let gap = rule.nodes[i + 1] - rule.nodes[i];
                let mid = 0.5 * (rule.nodes[i] + rule.nodes[i + 1]);
                knots.push((mid - 0.5 * margin * gap, s0));
                knots.push((mid + 0.5 * margin * gap, s1));
            }
        }
    }
    if rule.interval.b() > last {
        knots.push((rule.interval.b(), sign(rule.weights[rule.weights.len() - 1])));
    }
    let mut w = make_piecewise_linear(&knots)?;
    w = ScalarFunction::new(
        format!("witness:{}:{}", rule.family.as_str(), rule.num_nodes()),
        w.domain(),
        0,
        {
            let inner = w.clone();
            move |x| inner.eval(x).unwrap_or(0.0)
        },
    );
    Ok(w)
}
