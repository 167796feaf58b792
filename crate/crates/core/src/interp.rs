//! Polynomial interpolation operators on configurable node families,
//! evaluated in second-form barycentric representation; the Lebesgue
//! constant as the operator norm on (C[a,b], ‖·‖_∞); the Rolle-based
//! pointwise error bound; and the Runge divergence study.
//!
//! Barycentric weights and off-node evaluation run in double-double
//! arithmetic (see [`crate::dd`]): the equispaced degree-40 study lives at
//! Lebesgue constants ~5e9 where plain f64 cancellation would swamp the
//! polynomial-reproduction tolerance.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::funcspace::{
    golden_max, sup_norm, Interval, NormEstimate, NormKind, ScalarFunction,
    DEFAULT_REFINE_TOL, DEFAULT_SUP_RESOLUTION,
};
use crate::kahan::KahanSum;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Equispaced,
    Chebyshev,
    Custom,
}

type NodeGenerator = Arc<dyn Fn(usize) -> Vec<f64> + Send + Sync>;

/// A family of node sets indexed by the polynomial degree n (n+1 nodes each).
#[derive(Clone)]
pub struct NodeFamily {
    kind: NodeKind,
    interval: Interval,
    generator: Option<NodeGenerator>,
}

impl NodeFamily {
    pub fn equispaced(interval: Interval) -> Self {
        Self {
            kind: NodeKind::Equispaced,
            interval,
            generator: None,
        }
    }

    /// Chebyshev points of the second kind (extrema), mapped affinely; both
    /// endpoints are included, mirroring the equispaced family.
    pub fn chebyshev(interval: Interval) -> Self {
        Self {
            kind: NodeKind::Chebyshev,
            interval,
            generator: None,
        }
    }

    pub fn custom(
        interval: Interval,
        generator: impl Fn(usize) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: NodeKind::Custom,
            interval,
            generator: Some(Arc::new(generator)),
        }
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// The n+1 strictly increasing nodes for degree n.
    pub fn nodes(&self, n: usize) -> Result<Vec<f64>> {
        let (a, b) = (self.interval.a(), self.interval.b());
        let mid = self.interval.midpoint();
        let half = 0.5 * self.interval.len();
        let nodes = match (self.kind, &self.generator) {
            (NodeKind::Custom, Some(g)) => g(n),
            (NodeKind::Equispaced, _) => {
                if n == 0 {
                    vec![mid]
                } else {
                    (0..=n)
                        .map(|i| a + (b - a) * i as f64 / n as f64)
                        .collect()
                }
            }
            (NodeKind::Chebyshev, _) => {
                if n == 0 {
                    vec![mid]
                } else {
                    (0..=n)
                        .map(|i| {
                            let t = -(std::f64::consts::PI * i as f64 / n as f64).cos();
                            (mid + half * t).clamp(a, b)
                        })
                        .collect()
                }
            }
            (NodeKind::Custom, None) => unreachable!("custom family always has a generator"),
        };
        if nodes.len() != n + 1 {
            return Err(Error::InvalidArgument(format!(
                "node generator returned {} nodes for degree {n}",
                nodes.len()
            )));
        }
        validate_nodes(&nodes, self.interval)?;
        Ok(nodes)
    }
}

fn validate_nodes(nodes: &[f64], interval: Interval) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("empty node set".into()));
    }
    for w in nodes.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument(format!(
                "nodes must be strictly increasing (no duplicates): {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !interval.contains(nodes[0]) || !interval.contains(nodes[nodes.len() - 1]) {
        return Err(Error::InvalidArgument(
            "nodes must lie inside the family interval".into(),
        ));
    }
    Ok(())
}

/// Barycentric weights λᵢ = 1/∏_{j≠i}(xᵢ−xⱼ) in double-double, rescaled by a
/// power of two (exactly) so the largest magnitude is ~1. The second
/// barycentric form is invariant under common scaling.
fn barycentric_weights(nodes: &[f64]) -> Vec<Dd> {
    let n = nodes.len();
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut prod = Dd::from(1.0);
        for j in 0..n {
            if j != i {
                prod = prod.mul(Dd::from(nodes[i]).sub(Dd::from(nodes[j])));
            }
        }
        weights.push(Dd::from(1.0).div(prod));
    }
    let max_hi = weights
        .iter()
        .map(|w| w.hi.abs())
        .fold(0.0f64, f64::max);
    if max_hi > 0.0 {
        let scale = 2.0f64.powi(-max_hi.log2().round() as i32);
        for w in &mut weights {
            w.hi *= scale;
            w.lo *= scale;
        }
    }
    weights
}

/// Snap window for node-coincidence detection during evaluation.
fn node_snap(x: f64, node: f64) -> bool {
    (x - node).abs() <= 4.0 * f64::EPSILON * (1.0 + node.abs())
}

/// The unique degree-≤n interpolant of the stored values, in second-form
/// barycentric representation. Evaluation at a node returns the stored value
/// by table lookup; off-node points use the barycentric formula.
#[derive(Clone)]
pub struct Interpolant {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<Dd>,
    degree_bound: usize,
}

impl Interpolant {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// f64 projections of the (rescaled) barycentric weights.
    pub fn barycentric_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.to_f64()).collect()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn eval(&self, x: f64) -> f64 {
        for (i, &node) in self.nodes.iter().enumerate() {
            if node_snap(x, node) {
                return self.values[i];
            }
        }
        let xd = Dd::from(x);
        let mut num = Dd::ZERO;
        let mut den = Dd::ZERO;
        for i in 0..self.nodes.len() {
            let t = self.weights[i].div(xd.sub(Dd::from(self.nodes[i])));
            num = num.add(t.mul(Dd::from(self.values[i])));
            den = den.add(t);
        }
        num.div(den).to_f64()
    }

    /// Wrap as a function on [x₀, xₙ] for norm machinery.
    pub fn to_function(&self, id: impl Into<String>) -> Result<ScalarFunction> {
        let domain = Interval::new(self.nodes[0], self.nodes[self.nodes.len() - 1])?;
        let me = self.clone();
        Ok(ScalarFunction::new(
            id,
            domain,
            crate::funcspace::SMOOTHNESS_UNBOUNDED,
            move |x| me.eval(x),
        ))
    }

    /// Stable JSON shape: {nodes, values, weights}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nodes": self.nodes,
            "values": self.values,
            "weights": self.barycentric_weights(),
        })
    }
}

/// Interpolate `f` at the given strictly increasing nodes inside its domain.
pub fn interpolate(f: &ScalarFunction, nodes: &[f64]) -> Result<Interpolant> {
    validate_nodes(nodes, f.domain())?;
    let values: Vec<f64> = nodes.iter().map(|&x| f.eval(x)).collect::<Result<_>>()?;
    Ok(Interpolant {
        weights: barycentric_weights(nodes),
        degree_bound: nodes.len() - 1,
        nodes: nodes.to_vec(),
        values,
    })
}

/// The Lebesgue function Λ(x) = Σᵢ|ℓᵢ(x)| evaluated through the barycentric
/// weights (f64: positive numerator sum, so only the denominator cancels,
/// which is harmless at the accuracy the growth checks need).
fn lebesgue_function(nodes: &[f64], weights: &[f64], x: f64) -> f64 {
    for &node in nodes {
        if node_snap(x, node) {
            return 1.0;
        }
    }
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for (node, w) in nodes.iter().zip(weights) {
        let t = w / (x - node);
        num.add(t.abs());
        den.add(t);
    }
    num.total() / den.total().abs()
}

/// Sampled maximum of the Lebesgue function over the node span: the operator
/// norm ‖P_n‖ on (C[a,b], ‖·‖_∞). Requires resolution ≥ 10 × node count;
/// the result is a lower bound of the true norm (kind = sampled).
pub fn lebesgue_constant(nodes: &[f64], resolution: usize) -> Result<NormEstimate> {
    if resolution < 10 * nodes.len() {
        return Err(Error::InvalidArgument(format!(
            "lebesgue_constant needs resolution >= 10x node count ({} < {})",
            resolution,
            10 * nodes.len()
        )));
    }
    if nodes.len() == 1 {
        return Ok(NormEstimate {
            value: 1.0,
            kind: NormKind::Sampled,
            grid_points: resolution,
            refinement_tolerance: 0.0,
        });
    }
    validate_nodes(nodes, Interval::new(nodes[0], nodes[nodes.len() - 1])?)?;
    let weights: Vec<f64> = barycentric_weights(nodes).iter().map(|w| w.to_f64()).collect();
    let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
    let eval = |x: f64| -> Result<f64> { Ok(lebesgue_function(nodes, &weights, x)) };
    let grid: Vec<f64> = (0..resolution)
        .map(|i| a + (b - a) * i as f64 / (resolution - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&x| eval(x)).collect::<Result<_>>()?;
    let mut best = 1.0f64;
    for v in &vals {
        best = best.max(*v);
    }
    let tol = DEFAULT_REFINE_TOL * (b - a).max(1.0);
    for j in 1..vals.len() - 1 {
        if vals[j] >= vals[j - 1] && vals[j] >= vals[j + 1] {
            let (_, fx) = golden_max(grid[j - 1], grid[j + 1], tol, &eval)?;
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

/// The Rolle-based pointwise bound: deriv_bound/(n+1)! · |∏(x − xᵢ)|, a
/// certified bound on |f(x) − (P_n f)(x)| whenever deriv_bound ≥ sup|f^(n+1)|.
pub fn interp_error_bound(deriv_bound: f64, nodes: &[f64], x: f64) -> f64 {
    let mut product = 1.0f64;
    for &node in nodes {
        product *= x - node;
    }
    let mut factorial = 1.0f64;
    for k in 2..=nodes.len() {
        factorial *= k as f64;
    }
    deriv_bound / factorial * product.abs()
}

/// One row of the Runge divergence study.
#[derive(Debug, Clone, Serialize)]
pub struct RungeRow {
    pub n: usize,
    pub max_error: f64,
    pub lebesgue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RungeStudyTable {
    pub node_kind: NodeKind,
    pub rows: Vec<RungeRow>,
}

impl RungeStudyTable {
    /// CSV with header `n,max_error,lebesgue`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,max_error,lebesgue\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, r.max_error, r.lebesgue));
        }
        out
    }
}

/// Sup-norm interpolation error and Lebesgue constant per degree, for an
/// arbitrary target function (the classical study uses Runge's function).
pub fn study(
    family: &NodeFamily,
    target: &ScalarFunction,
    n_list: &[usize],
) -> Result<RungeStudyTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty degree list".into()));
    }
    if !target.domain().covers(&family.interval()) {
        return Err(Error::DomainMismatch {
            id: target.id().to_string(),
            a: family.interval().a(),
            b: family.interval().b(),
        });
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let nodes = family.nodes(n)?;
        let p = interpolate(target, &nodes)?;
        let max_error = if nodes.len() == 1 {
            // constant interpolant: sup |target - target(x0)| over the interval
            let c = p.values()[0];
            let shifted = ScalarFunction::new(
                "shifted",
                family.interval(),
                0,
                {
                    let t = target.clone();
                    move |x| t.eval(x).map(|v| v - c).unwrap_or(f64::NAN)
                },
            );
            sup_norm(&shifted, DEFAULT_SUP_RESOLUTION)?.value
        } else {
            let pf = p.to_function(format!("interp:{n}"))?;
            let diff = ScalarFunction::linear_combination(1.0, target, -1.0, &pf)?;
            sup_norm(&diff, DEFAULT_SUP_RESOLUTION)?.value
        };
        let resolution = (10 * (n + 1)).max(4096);
        let lebesgue = lebesgue_constant(&nodes, resolution)?.value;
        rows.push(RungeRow {
            n,
            max_error,
            lebesgue,
        });
    }
    Ok(RungeStudyTable {
        node_kind: family.kind(),
        rows,
    })
}

/// The classical Runge divergence study on [-1, 1].
pub fn runge_study(family: &NodeFamily, n_list: &[usize]) -> Result<RungeStudyTable> {
    study(family, &crate::funcspace::make_runge(), n_list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{make_monomial, make_runge, make_sine};

    fn sym() -> Interval {
        Interval::new(-1.0, 1.0).unwrap()
    }

    #[test]
    fn families_generate_sorted_nodes_with_endpoints() {
        for fam in [NodeFamily::equispaced(sym()), NodeFamily::chebyshev(sym())] {
            for n in [0usize, 1, 7, 40] {
                let nodes = fam.nodes(n).unwrap();
                assert_eq!(nodes.len(), n + 1);
                if n > 0 {
                    assert_eq!(nodes[0], -1.0);
                    assert_eq!(nodes[n], 1.0);
                }
            }
        }
    }

    #[test]
    fn single_node_interpolant_is_constant() {
        let f = make_runge();
        let p = interpolate(&f, &[0.3]).unwrap();
        let c = f.eval(0.3).unwrap();
        for x in [-0.9, 0.0, 0.3, 0.99] {
            assert_eq!(p.eval(x), c);
        }
    }

    #[test]
    fn interpolation_property_exact_at_nodes() {
        let f = make_runge();
        let nodes = NodeFamily::equispaced(sym()).nodes(12).unwrap();
        let p = interpolate(&f, &nodes).unwrap();
        for (i, &x) in nodes.iter().enumerate() {
            assert_eq!(p.eval(x), p.values()[i], "node {i}");
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let f = make_runge();
        assert!(interpolate(&f, &[0.0, 0.0, 0.5]).is_err());
        assert!(interpolate(&f, &[0.5, 0.0]).is_err());
    }

    #[test]
    fn polynomial_reproduction_within_data_precision() {
        // Chebyshev reproduces to 1e-10 at every n ≤ 40; equispaced does so
        // for n ≤ 30 (the f64 rounding of the node values is amplified by the
        // Lebesgue constant past ~n=35, independent of evaluator precision).
        let probe: Vec<f64> = (0..1000).map(|i| -1.0 + 2.0 * i as f64 / 999.0).collect();
        let check = |fam: &NodeFamily, n: usize, tol: f64| {
            let nodes = fam.nodes(n).unwrap();
            for d in [0usize, 1, 3, n / 2, n] {
                let f = make_monomial(d, sym());
                let p = interpolate(&f, &nodes).unwrap();
                let mut worst = 0.0f64;
                for &x in &probe {
                    worst = worst.max((p.eval(x) - f.eval(x).unwrap()).abs());
                }
                assert!(worst <= tol, "kind={:?} n={n} d={d}: {worst}", fam.kind());
            }
        };
        let equi = NodeFamily::equispaced(sym());
        let cheb = NodeFamily::chebyshev(sym());
        for n in [5usize, 10, 20, 30] {
            check(&equi, n, 1e-10);
        }
        for n in [5usize, 10, 20, 30, 40] {
            check(&cheb, n, 1e-10);
        }
        check(&equi, 40, 1e-8); // data-precision regression pin
    }

    #[test]
    fn runge_equispaced_oscillates_past_one() {
        let f = make_runge();
        let nodes = NodeFamily::equispaced(sym()).nodes(10).unwrap();
        let p = interpolate(&f, &nodes).unwrap();
        let mut worst = 0.0f64;
        for i in 0..200 {
            let x = 0.9 + 0.1 * i as f64 / 199.0;
            for s in [x, -x] {
                worst = worst.max((p.eval(s) - f.eval(s).unwrap()).abs());
            }
        }
        assert!(worst > 1.0, "worst oscillation {worst}");
    }

    #[test]
    fn linearity_pointwise() {
        let f = make_runge();
        let g = make_monomial(4, sym());
        let combo = ScalarFunction::linear_combination(0.7, &f, -1.3, &g).unwrap();
        let nodes = NodeFamily::chebyshev(sym()).nodes(9).unwrap();
        let pf = interpolate(&f, &nodes).unwrap();
        let pg = interpolate(&g, &nodes).unwrap();
        let pc = interpolate(&combo, &nodes).unwrap();
        for x in [-0.77, -0.2, 0.123, 0.88] {
            let lhs = pc.eval(x);
            let rhs = 0.7 * pf.eval(x) - 1.3 * pg.eval(x);
            assert!(
                (lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0),
                "x={x}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn lebesgue_two_spanning_nodes_is_one() {
        let est = lebesgue_constant(&[-1.0, 1.0], 64).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12, "got {}", est.value);
    }

    #[test]
    fn lebesgue_equispaced_matches_known_value_and_grows() {
        let fam = NodeFamily::equispaced(sym());
        let l10 = lebesgue_constant(&fam.nodes(10).unwrap(), 4096).unwrap().value;
        assert!((l10 - 29.899).abs() < 0.05, "Λ_10 = {l10}");
        let l20 = lebesgue_constant(&fam.nodes(20).unwrap(), 4096).unwrap().value;
        assert!(l20 > l10);
        assert!((l20 - 10986.0).abs() / 10986.0 < 0.01, "Λ_20 = {l20}");
    }

    #[test]
    fn lebesgue_chebyshev_small_and_slow() {
        let fam = NodeFamily::chebyshev(sym());
        let l10 = lebesgue_constant(&fam.nodes(10).unwrap(), 4096).unwrap().value;
        let l20 = lebesgue_constant(&fam.nodes(20).unwrap(), 4096).unwrap().value;
        assert!(l10 < 4.0 && l20 < 4.0, "Λ10={l10} Λ20={l20}");
        assert!(l20 > l10);
        let fam_e = NodeFamily::equispaced(sym());
        let e10 = lebesgue_constant(&fam_e.nodes(10).unwrap(), 4096).unwrap().value;
        let e20 = lebesgue_constant(&fam_e.nodes(20).unwrap(), 4096).unwrap().value;
        assert!((l20 - l10) < (e20 - e10));
    }

    #[test]
    fn lebesgue_resolution_precondition() {
        let nodes = NodeFamily::equispaced(sym()).nodes(10).unwrap();
        assert!(lebesgue_constant(&nodes, 100).is_err());
    }

    #[test]
    fn error_bound_vanishes_at_nodes_and_for_polynomials() {
        let nodes = NodeFamily::chebyshev(sym()).nodes(4).unwrap();
        assert_eq!(interp_error_bound(2.5, &nodes, nodes[2]), 0.0);
        assert_eq!(interp_error_bound(0.0, &nodes, 0.33), 0.0);
    }

    #[test]
    fn error_bound_dominates_measured_error_for_sine() {
        // sin on [0,1], 5 Chebyshev nodes (degree 4): |f^(5)| ≤ 1.
        let f = make_sine();
        let unit = Interval::new(0.0, 1.0).unwrap();
        let nodes = NodeFamily::chebyshev(unit).nodes(4).unwrap();
        let p = interpolate(&f, &nodes).unwrap();
        for i in 0..100 {
            let x = i as f64 / 99.0;
            let measured = (f.eval(x).unwrap() - p.eval(x)).abs();
            let bound = interp_error_bound(1.0, &nodes, x);
            assert!(measured <= bound + 1e-15, "x={x}: {measured} > {bound}");
        }
    }

    #[test]
    fn study_runge_trends() {
        let ns = [4usize, 8, 12];
        let equi = runge_study(&NodeFamily::equispaced(sym()), &ns).unwrap();
        assert!(equi.rows[2].max_error > equi.rows[0].max_error);
        let cheb = runge_study(&NodeFamily::chebyshev(sym()), &ns).unwrap();
        assert!(cheb.rows[2].max_error < cheb.rows[0].max_error);
        let csv = cheb.to_csv();
        assert!(csv.starts_with("n,max_error,lebesgue\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn study_degree_zero_bounded_by_one() {
        let table = runge_study(&NodeFamily::equispaced(sym()), &[0]).unwrap();
        assert!(table.rows[0].max_error <= 1.0, "{}", table.rows[0].max_error);
    }

    #[test]
    fn interpolant_json_shape() {
        let f = make_runge();
        let p = interpolate(&f, &[-0.5, 0.0, 0.5]).unwrap();
        let v = p.to_json();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 3);
        assert_eq!(v["values"][1], 1.0);
        assert!(v["weights"].as_array().unwrap().iter().all(|w| w.as_f64().unwrap() != 0.0));
    }
}
