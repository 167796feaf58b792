//! The equivalence-theorem engine: given a discrete operator family and its
//! exact reference, produce consistency / stability / convergence verdicts
//! with evidence tables, then cross-check the verdict triple against the
//! equivalence pattern (a consistent family converges iff it is stable, and
//! convergence implies stability regardless of consistency).
//!
//! Finite schedules cannot prove limits, so verdicts are three-valued and
//! every decision threshold is configuration echoed into the report.

use crate::diffops::{
    apply_diff, c1_norm_certificate, sup_norm_probe_lower_bound, DifferenceOperator, Stencil,
};
use crate::error::{Error, Result};
use crate::funcspace::{
    make_monomial, make_oscillator, make_piecewise_linear, make_runge, make_sine, sup_norm,
    Interval, NormEstimate, ScalarFunction, DEFAULT_SUP_RESOLUTION,
};
use crate::interp::{interpolate, lebesgue_constant, NodeFamily};
use crate::montecarlo::{convergence_trace, default_seed_panel, mc_norm_bound, Pdf};
use crate::quadrature::{
    apply as quad_apply, composite_trapezoid_rule, gauss_legendre_rule, newton_cotes_rule,
    operator_norm,
};
use crate::rng::RNG_ALGORITHM;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    ByN,
    ByH,
}

/// Result of a discrete or reference application: a number (integrals) or a
/// function (derivatives, interpolants).
pub enum DiscreteOutput {
    Scalar(f64),
    Function(ScalarFunction),
}

type ApplyFn = Box<dyn Fn(f64, &ScalarFunction) -> Result<DiscreteOutput> + Send + Sync>;
type ReferenceFn = Box<dyn Fn(&ScalarFunction) -> Result<DiscreteOutput> + Send + Sync>;
type NormFn = Box<dyn Fn(f64) -> Result<NormEstimate> + Send + Sync>;
type PanelFn = Box<dyn Fn(&[f64], &ScalarFunction) -> Result<Vec<Vec<f64>>> + Send + Sync>;

/// An indexed family of discrete operators with its exact reference.
///
/// `index_schedule` is monotone: increasing n (ByN) or decreasing h (ByH).
/// For stochastic families, `panel_apply` returns per-seed estimates at every
/// schedule index (outer Vec over the schedule) and the probabilistic panel
/// rule replaces the deterministic error rule.
pub struct FamilyUnderTest {
    pub family_id: String,
    pub index_kind: IndexKind,
    pub index_schedule: Vec<f64>,
    pub discrete_apply: ApplyFn,
    pub reference_apply: ReferenceFn,
    pub norm_of: NormFn,
    pub dense_generators: Vec<ScalarFunction>,
    pub corpus: Vec<ScalarFunction>,
    pub panel_apply: Option<PanelFn>,
}

/// Decision thresholds; every report echoes the set it was produced with.
#[derive(Debug, Clone, Serialize)]
pub struct AuditConfig {
    /// Dense-subspace generator degree cap.
    pub max_degree: usize,
    /// Consistency: per-generator error must settle below this.
    pub consistency_tol: f64,
    /// Convergence: per-probe error must settle below this.
    pub convergence_tol: f64,
    /// Stability "yes": final-window max/min and last/first must stay below this.
    pub growth_factor: f64,
    /// Stability window length (≥ 3).
    pub window: usize,
    /// Stability "no": log-log regression slope threshold over the window.
    pub divergence_slope: f64,
    /// Stability "no": minimum regression fit quality.
    pub divergence_r2: f64,
    /// Stability "no": total monotone growth beyond this factor.
    pub total_growth_limit: f64,
    /// Relative slack when classifying an error tail as non-decreasing.
    pub tail_slack: f64,
    /// Panel rule: fraction of seeds that must land within tolerance.
    pub mc_pass_fraction: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            max_degree: 12,
            consistency_tol: 1e-6,
            convergence_tol: 1e-3,
            growth_factor: 1.5,
            window: 4,
            divergence_slope: 0.5,
            divergence_r2: 0.9,
            total_growth_limit: 10.0,
            tail_slack: 0.1,
            mc_pass_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictValue {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub value: VerdictValue,
    pub rationale: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvidenceRow {
    pub probe: String,
    pub index: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub consistency: Vec<EvidenceRow>,
    pub stability: Vec<EvidenceRow>,
    pub convergence: Vec<EvidenceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremCheck {
    #[serde(rename = "consistent_with_theorem")]
    ConsistentWithTheorem,
    #[serde(rename = "CONTRADICTION")]
    Contradiction,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub consistency: Verdict,
    pub stability: Verdict,
    pub convergence: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub family_id: String,
    pub index_kind: IndexKind,
    pub index_schedule: Vec<f64>,
    pub verdicts: Verdicts,
    pub theorem_check: TheoremCheck,
    pub theorem_note: String,
    pub thresholds: AuditConfig,
    pub rng_algorithm: Option<&'static str>,
    pub evidence: Evidence,
}

impl AuditReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Flat CSV for one check: header `probe,index,value`.
    pub fn evidence_csv(&self, check: &str) -> Option<String> {
        let rows = match check {
            "consistency" => &self.evidence.consistency,
            "stability" => &self.evidence.stability,
            "convergence" => &self.evidence.convergence,
            _ => return None,
        };
        let mut out = String::from("probe,index,value\n");
        for r in rows {
            out.push_str(&format!("{},{},{}\n", r.probe, r.index, r.value));
        }
        Some(out)
    }
}

fn error_between(discrete: &DiscreteOutput, reference: &DiscreteOutput) -> Result<f64> {
    match (discrete, reference) {
        (DiscreteOutput::Scalar(a), DiscreteOutput::Scalar(b)) => Ok((a - b).abs()),
        (DiscreteOutput::Function(df), DiscreteOutput::Function(rf)) => {
            let diff = ScalarFunction::linear_combination(1.0, df, -1.0, rf)?;
            Ok(sup_norm(&diff, DEFAULT_SUP_RESOLUTION)?.value)
        }
        _ => Err(Error::InvalidArgument(
            "discrete and reference outputs have different kinds".into(),
        )),
    }
}

/// Last-three tail is non-increasing, or already settled below tol (exact
/// families sit on a roundoff floor whose noise is not monotone).
fn tail_settled(errors: &[f64], tol: f64) -> bool {
    let k = errors.len().min(3);
    let tail = &errors[errors.len() - k..];
    let non_increasing = tail.windows(2).all(|w| w[1] <= w[0]);
    let plateau_below_tol = tail.iter().all(|e| *e <= tol);
    non_increasing || plateau_below_tol
}

/// Last-three tail fails to decrease (within relative slack).
fn tail_non_decreasing(errors: &[f64], slack: f64) -> bool {
    let k = errors.len().min(3);
    let tail = &errors[errors.len() - k..];
    tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - slack))
}

/// Least-squares slope and R² of y against x.
fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

/// Deterministic per-probe error traces; shared by consistency (dense
/// generators) and convergence (corpus).
fn error_traces(
    fut: &FamilyUnderTest,
    probes: &[ScalarFunction],
    evidence: &mut Vec<EvidenceRow>,
) -> Result<Vec<(String, Vec<f64>)>> {
    let mut traces = Vec::with_capacity(probes.len());
    for f in probes {
        let reference = (fut.reference_apply)(f)?;
        let mut errors = Vec::with_capacity(fut.index_schedule.len());
        for &idx in &fut.index_schedule {
            let discrete = (fut.discrete_apply)(idx, f)?;
            let e = error_between(&discrete, &reference)?;
            evidence.push(EvidenceRow {
                probe: f.id().to_string(),
                index: idx,
                value: e,
            });
            errors.push(e);
        }
        traces.push((f.id().to_string(), errors));
    }
    Ok(traces)
}

/// Panel traces for stochastic families: per probe, per index, the fraction
/// of seeds within tol and the median absolute error. The reference must be
/// scalar.
fn panel_traces(
    fut: &FamilyUnderTest,
    probes: &[ScalarFunction],
    tol: f64,
    evidence: &mut Vec<EvidenceRow>,
) -> Result<Vec<(String, Vec<f64>, Vec<f64>)>> {
    let panel = fut.panel_apply.as_ref().expect("panel family");
    let mut out = Vec::with_capacity(probes.len());
    for f in probes {
        let reference = match (fut.reference_apply)(f)? {
            DiscreteOutput::Scalar(v) => v,
            DiscreteOutput::Function(_) => {
                return Err(Error::InvalidArgument(
                    "panel rule needs a scalar reference".into(),
                ))
            }
        };
        let per_index = panel(&fut.index_schedule, f)?;
        let mut fractions = Vec::with_capacity(per_index.len());
        let mut medians = Vec::with_capacity(per_index.len());
        for (k, estimates) in per_index.iter().enumerate() {
            let mut errs: Vec<f64> = estimates.iter().map(|e| (e - reference).abs()).collect();
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let within = errs.iter().filter(|e| **e <= tol).count() as f64 / errs.len() as f64;
            let median = errs[errs.len() / 2];
            let idx = fut.index_schedule[k];
            evidence.push(EvidenceRow {
                probe: format!("{}[median_abs_error]", f.id()),
                index: idx,
                value: median,
            });
            evidence.push(EvidenceRow {
                probe: format!("{}[panel_fraction]", f.id()),
                index: idx,
                value: within,
            });
            fractions.push(within);
            medians.push(median);
        }
        out.push((f.id().to_string(), fractions, medians));
    }
    Ok(out)
}

fn decide_deterministic(
    traces: &[(String, Vec<f64>)],
    tol: f64,
    tail_slack: f64,
    what: &str,
) -> Verdict {
    let mut all_pass = true;
    let mut hard_fail: Option<&str> = None;
    let mut every_index_above: Option<&str> = None;
    for (id, errors) in traces {
        let last = *errors.last().expect("nonempty schedule");
        let pass = last <= tol && tail_settled(errors, tol);
        if !pass {
            all_pass = false;
        }
        if last > 10.0 * tol && tail_non_decreasing(errors, tail_slack) {
            hard_fail = Some(id);
        }
        if errors.iter().all(|e| *e > tol) {
            every_index_above = Some(id);
        }
    }
    if let Some(id) = hard_fail {
        return Verdict {
            value: VerdictValue::No,
            rationale: format!(
                "{what}: probe `{id}` stays bounded away from zero (final error > 10x tol = {:.3e} with non-decreasing tail)",
                10.0 * tol
            ),
        };
    }
    if all_pass {
        return Verdict {
            value: VerdictValue::Yes,
            rationale: format!(
                "{what}: every probe settles below tol = {tol:.3e} by the final index"
            ),
        };
    }
    if let Some(id) = every_index_above {
        return Verdict {
            value: VerdictValue::Inconclusive,
            rationale: format!(
                "{what}: probe `{id}` exceeds tol at every index but its tail is not clearly non-decreasing"
            ),
        };
    }
    Verdict {
        value: VerdictValue::Inconclusive,
        rationale: format!("{what}: some probe has not settled below tol = {tol:.3e}"),
    }
}

fn decide_panel(
    traces: &[(String, Vec<f64>, Vec<f64>)],
    pass_fraction: f64,
    tol: f64,
    what: &str,
) -> Verdict {
    let all_pass = traces.iter().all(|(_, fractions, medians)| {
        *fractions.last().expect("nonempty") >= pass_fraction && tail_settled(medians, tol)
    });
    if all_pass {
        Verdict {
            value: VerdictValue::Yes,
            rationale: format!(
                "{what}: at the final index at least {:.0}% of the seed panel lands within tol = {tol:.3e} for every probe",
                pass_fraction * 100.0
            ),
        }
    } else {
        Verdict {
            value: VerdictValue::Inconclusive,
            rationale: format!(
                "{what}: panel pass fraction below {:.0}% for some probe (finite panel cannot certify divergence)",
                pass_fraction * 100.0
            ),
        }
    }
}

/// Convergence of the family on the dense-subspace generators.
pub fn check_consistency(
    fut: &FamilyUnderTest,
    config: &AuditConfig,
    evidence: &mut Vec<EvidenceRow>,
) -> Result<Verdict> {
    if fut.dense_generators.is_empty() {
        return Err(Error::InvalidArgument("no dense-subspace generators".into()));
    }
    if fut.panel_apply.is_some() {
        let traces = panel_traces(fut, &fut.dense_generators, config.consistency_tol, evidence)?;
        Ok(decide_panel(
            &traces,
            config.mc_pass_fraction,
            config.consistency_tol,
            "consistency",
        ))
    } else {
        let traces = error_traces(fut, &fut.dense_generators, evidence)?;
        Ok(decide_deterministic(
            &traces,
            config.consistency_tol,
            config.tail_slack,
            "consistency",
        ))
    }
}

/// Uniform boundedness of the norm sequence over the schedule.
pub fn check_stability(
    fut: &FamilyUnderTest,
    config: &AuditConfig,
    evidence: &mut Vec<EvidenceRow>,
) -> Result<Verdict> {
    if config.window < 3 {
        return Err(Error::InvalidArgument("stability window must be >= 3".into()));
    }
    let mut norms = Vec::with_capacity(fut.index_schedule.len());
    for &idx in &fut.index_schedule {
        let est = (fut.norm_of)(idx)?;
        evidence.push(EvidenceRow {
            probe: "operator_norm".into(),
            index: idx,
            value: est.value,
        });
        norms.push(est.value);
    }
    let w = config.window.min(norms.len());
    let tail = &norms[norms.len() - w..];
    let tail_max = tail.iter().cloned().fold(f64::MIN, f64::max);
    let tail_min = tail.iter().cloned().fold(f64::MAX, f64::min);
    let first = norms[0];
    let last = *norms.last().expect("nonempty");

    // growth coordinate: log n for ByN, log(1/h) for ByH
    let xs: Vec<f64> = fut.index_schedule[fut.index_schedule.len() - w..]
        .iter()
        .map(|&idx| match fut.index_kind {
            IndexKind::ByN => idx.ln(),
            IndexKind::ByH => (1.0 / idx).ln(),
        })
        .collect();
    let ys: Vec<f64> = tail.iter().map(|v| v.max(1e-300).ln()).collect();
    let (slope, r2) = linear_regression(&xs, &ys);

    let monotone_increase = norms.windows(2).all(|p| p[1] > p[0]);
    let bounded_window = tail_min > 0.0 && tail_max / tail_min <= config.growth_factor;
    let bounded_total = last <= config.growth_factor * first;

    if (slope >= config.divergence_slope && r2 >= config.divergence_r2)
        || (monotone_increase && last / first > config.total_growth_limit)
    {
        return Ok(Verdict {
            value: VerdictValue::No,
            rationale: format!(
                "stability: norm sequence diverges (log-log slope {slope:.3} with R^2 {r2:.3}; total growth {:.3e})",
                last / first
            ),
        });
    }
    if bounded_window && bounded_total {
        return Ok(Verdict {
            value: VerdictValue::Yes,
            rationale: format!(
                "stability: norms bounded (final-window max/min {:.4}, last/first {:.4}, both <= growth factor {})",
                tail_max / tail_min,
                last / first,
                config.growth_factor
            ),
        });
    }
    Ok(Verdict {
        value: VerdictValue::Inconclusive,
        rationale: format!(
            "stability: growth neither bounded by factor {} nor clearly divergent (slope {slope:.3}, R^2 {r2:.3})",
            config.growth_factor
        ),
    })
}

/// Pointwise convergence on the probe corpus.
pub fn check_convergence(
    fut: &FamilyUnderTest,
    config: &AuditConfig,
    evidence: &mut Vec<EvidenceRow>,
) -> Result<Verdict> {
    if fut.corpus.is_empty() {
        return Err(Error::InvalidArgument("empty convergence corpus".into()));
    }
    if fut.panel_apply.is_some() {
        let traces = panel_traces(fut, &fut.corpus, config.convergence_tol, evidence)?;
        Ok(decide_panel(
            &traces,
            config.mc_pass_fraction,
            config.convergence_tol,
            "convergence",
        ))
    } else {
        let traces = error_traces(fut, &fut.corpus, evidence)?;
        Ok(decide_deterministic(
            &traces,
            config.convergence_tol,
            config.tail_slack,
            "convergence",
        ))
    }
}

fn theorem_verdict(v: &Verdicts) -> (TheoremCheck, String) {
    use VerdictValue::*;
    let c = v.consistency.value;
    let s = v.stability.value;
    let conv = v.convergence.value;
    if conv == Yes && s == No {
        return (
            TheoremCheck::Contradiction,
            "convergent but unstable: convergence implies stability".into(),
        );
    }
    if c == Yes && s == Yes && conv == No {
        return (
            TheoremCheck::Contradiction,
            "consistent and stable but not convergent: violates the equivalence".into(),
        );
    }
    let mut undecided = Vec::new();
    if c == Inconclusive {
        undecided.push("consistency");
    }
    if s == Inconclusive {
        undecided.push("stability");
    }
    if conv == Inconclusive {
        undecided.push("convergence");
    }
    let note = if undecided.is_empty() {
        "all verdicts decided; no contradiction".to_string()
    } else {
        format!(
            "theorem check computed over decided pairs only (undecided: {})",
            undecided.join(", ")
        )
    };
    (TheoremCheck::ConsistentWithTheorem, note)
}

/// Run the three checks and the truth-table cross-check.
pub fn run_audit(fut: &FamilyUnderTest, config: &AuditConfig) -> Result<AuditReport> {
    if fut.index_schedule.is_empty() {
        return Err(Error::InvalidArgument("empty index schedule".into()));
    }
    let monotone = match fut.index_kind {
        IndexKind::ByN => fut.index_schedule.windows(2).all(|w| w[1] > w[0]),
        IndexKind::ByH => fut.index_schedule.windows(2).all(|w| w[1] < w[0]),
    };
    if !monotone {
        return Err(Error::InvalidArgument(
            "index schedule must be monotone (increasing n / decreasing h)".into(),
        ));
    }
    let mut evidence = Evidence {
        consistency: Vec::new(),
        stability: Vec::new(),
        convergence: Vec::new(),
    };
    let consistency = check_consistency(fut, config, &mut evidence.consistency)?;
    let stability = check_stability(fut, config, &mut evidence.stability)?;
    let convergence = check_convergence(fut, config, &mut evidence.convergence)?;
    let verdicts = Verdicts {
        consistency,
        stability,
        convergence,
    };
    let (theorem_check, theorem_note) = theorem_verdict(&verdicts);
    Ok(AuditReport {
        family_id: fut.family_id.clone(),
        index_kind: fut.index_kind,
        index_schedule: fut.index_schedule.clone(),
        verdicts,
        theorem_check,
        theorem_note,
        thresholds: config.clone(),
        rng_algorithm: fut.panel_apply.as_ref().map(|_| RNG_ALGORITHM),
        evidence,
    })
}

// ----- built-in families ---------------------------------------------------

fn monomial_generators(domain: Interval, max_degree: usize) -> Vec<ScalarFunction> {
    (0..=max_degree).map(|d| make_monomial(d, domain)).collect()
}

/// Zigzag piecewise-linear generators whose knots deliberately avoid the
/// trapezoid nodes (its natural dense class is piecewise linear).
fn zigzag_generators() -> Vec<ScalarFunction> {
    vec![
        make_piecewise_linear(&[(-1.0, 0.0), (-1.0 / 3.0, 1.0), (1.0 / 3.0, -1.0), (1.0, 0.5)])
            .expect("static knots"),
        make_piecewise_linear(&[(-1.0, 0.5), (-0.2, -0.25), (0.7, 0.75), (1.0, 0.0)])
            .expect("static knots"),
    ]
}

fn scalar_reference() -> ReferenceFn {
    Box::new(|f: &ScalarFunction| {
        f.exact_integral()
            .map(DiscreteOutput::Scalar)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("probe `{}` carries no exact integral", f.id()))
            })
    })
}

fn gauss_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(-1.0, 1.0).expect("static");
    let fut = FamilyUnderTest {
        family_id: "gauss".into(),
        index_kind: IndexKind::ByN,
        index_schedule: vec![4.0, 8.0, 16.0, 32.0, 64.0],
        discrete_apply: Box::new(move |idx, f| {
            let rule = gauss_legendre_rule(idx as usize, interval)?;
            Ok(DiscreteOutput::Scalar(quad_apply(&rule, f)?))
        }),
        reference_apply: scalar_reference(),
        norm_of: Box::new(move |idx| {
            Ok(operator_norm(&gauss_legendre_rule(idx as usize, interval)?))
        }),
        dense_generators: monomial_generators(interval, 12),
        corpus: vec![make_runge()],
        panel_apply: None,
    };
    let config = AuditConfig {
        convergence_tol: 1e-6,
        ..AuditConfig::default()
    };
    (fut, config)
}

fn trapezoid_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(-1.0, 1.0).expect("static");
    let mut dense = monomial_generators(interval, 8);
    dense.extend(zigzag_generators());
    let fut = FamilyUnderTest {
        family_id: "trapezoid".into(),
        index_kind: IndexKind::ByN,
        index_schedule: vec![4.0, 16.0, 64.0, 256.0, 1024.0],
        discrete_apply: Box::new(move |idx, f| {
            let rule = composite_trapezoid_rule(idx as usize, interval)?;
            Ok(DiscreteOutput::Scalar(quad_apply(&rule, f)?))
        }),
        reference_apply: scalar_reference(),
        norm_of: Box::new(move |idx| {
            Ok(operator_norm(&composite_trapezoid_rule(idx as usize, interval)?))
        }),
        dense_generators: dense,
        corpus: vec![make_runge()],
        panel_apply: None,
    };
    let config = AuditConfig {
        consistency_tol: 1e-3,
        convergence_tol: 1e-3,
        ..AuditConfig::default()
    };
    (fut, config)
}

fn newton_cotes_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(-1.0, 1.0).expect("static");
    let fut = FamilyUnderTest {
        family_id: "newton-cotes".into(),
        index_kind: IndexKind::ByN,
        // decade subsequence: the weight mass zigzags by parity between
        // consecutive node counts but grows without bound along decades
        index_schedule: vec![10.0, 20.0, 30.0, 40.0],
        discrete_apply: Box::new(move |idx, f| {
            let rule = newton_cotes_rule(idx as usize, interval)?;
            Ok(DiscreteOutput::Scalar(quad_apply(&rule, f)?))
        }),
        reference_apply: scalar_reference(),
        norm_of: Box::new(move |idx| {
            Ok(operator_norm(&newton_cotes_rule(idx as usize, interval)?))
        }),
        dense_generators: monomial_generators(interval, 12),
        corpus: vec![make_runge()],
        panel_apply: None,
    };
    let config = AuditConfig {
        convergence_tol: 1e-3,
        ..AuditConfig::default()
    };
    (fut, config)
}

fn diff_reference() -> ReferenceFn {
    Box::new(|f: &ScalarFunction| {
        f.exact_derivative()
            .cloned()
            .map(DiscreteOutput::Function)
            .ok_or(Error::MissingDerivativeChain { have: 0, need: 1 })
    })
}

fn forward_diff_c1_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(0.0, 1.0).expect("static");
    let fut = FamilyUnderTest {
        family_id: "forward-diff-c1".into(),
        index_kind: IndexKind::ByH,
        index_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4],
        discrete_apply: Box::new(move |h, f| {
            let op = DifferenceOperator::new(Stencil::Forward, h, interval)?;
            Ok(DiscreteOutput::Function(apply_diff(&op, f)?))
        }),
        reference_apply: diff_reference(),
        norm_of: Box::new(move |h| {
            let op = DifferenceOperator::new(Stencil::Forward, h, interval)?;
            c1_norm_certificate(&op)
        }),
        dense_generators: monomial_generators(interval, 12),
        corpus: vec![make_sine(), make_monomial(5, interval)],
        panel_apply: None,
    };
    let config = AuditConfig {
        consistency_tol: 1e-2,
        convergence_tol: 1e-2,
        ..AuditConfig::default()
    };
    (fut, config)
}

fn forward_diff_sup_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(0.0, 1.0).expect("static");
    let fut = FamilyUnderTest {
        family_id: "forward-diff-sup".into(),
        index_kind: IndexKind::ByH,
        index_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4],
        discrete_apply: Box::new(move |h, f| {
            let op = DifferenceOperator::new(Stencil::Forward, h, interval)?;
            Ok(DiscreteOutput::Function(apply_diff(&op, f)?))
        }),
        reference_apply: diff_reference(),
        // measured lower bound 2/h from the half-period sine witness; the
        // certificate story of the C1 variant has no sup-norm analogue
        norm_of: Box::new(move |h| {
            Ok(NormEstimate {
                value: sup_norm_probe_lower_bound(h, interval)?,
                kind: crate::funcspace::NormKind::LowerBound,
                grid_points: DEFAULT_SUP_RESOLUTION,
                refinement_tolerance: crate::funcspace::DEFAULT_REFINE_TOL,
            })
        }),
        dense_generators: monomial_generators(interval, 12),
        // the oscillator's derivative exists but is not continuous at 0, so
        // its difference-quotient sup error never vanishes: an honest
        // non-convergence witness for the sup-norm topology
        corpus: vec![make_sine(), make_oscillator()],
        panel_apply: None,
    };
    let config = AuditConfig {
        consistency_tol: 1e-2,
        convergence_tol: 1e-2,
        ..AuditConfig::default()
    };
    (fut, config)
}

fn identity_reference() -> ReferenceFn {
    Box::new(|f: &ScalarFunction| Ok(DiscreteOutput::Function(f.clone())))
}

fn interp_family(id: &str, family: NodeFamily, schedule: Vec<f64>) -> FamilyUnderTest {
    let interval = family.interval();
    let norm_family = family.clone();
    FamilyUnderTest {
        family_id: id.into(),
        index_kind: IndexKind::ByN,
        index_schedule: schedule,
        discrete_apply: Box::new(move |idx, f| {
            let nodes = family.nodes(idx as usize)?;
            let p = interpolate(f, &nodes)?;
            Ok(DiscreteOutput::Function(
                p.to_function(format!("P_{}({})", idx, f.id()))?,
            ))
        }),
        reference_apply: identity_reference(),
        norm_of: Box::new(move |idx| {
            let nodes = norm_family.nodes(idx as usize)?;
            let resolution = (10 * nodes.len()).max(4096);
            lebesgue_constant(&nodes, resolution)
        }),
        dense_generators: monomial_generators(interval, 12),
        corpus: vec![make_runge()],
        panel_apply: None,
    }
}

fn interp_equispaced_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(-1.0, 1.0).expect("static");
    let fut = interp_family(
        "interp-equispaced",
        NodeFamily::equispaced(interval),
        vec![10.0, 20.0, 30.0, 40.0],
    );
    let config = AuditConfig {
        convergence_tol: 1e-2,
        ..AuditConfig::default()
    };
    (fut, config)
}

fn interp_chebyshev_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(-1.0, 1.0).expect("static");
    // starts at n = 10: the bounded-growth rule is a finite-range proxy, and
    // the log-growth of the Chebyshev Lebesgue constants from n = 2 would
    // read as unresolved growth rather than boundedness
    let fut = interp_family(
        "interp-chebyshev",
        NodeFamily::chebyshev(interval),
        vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
    );
    let config = AuditConfig {
        convergence_tol: 1e-2,
        ..AuditConfig::default()
    };
    (fut, config)
}

fn mc_family() -> (FamilyUnderTest, AuditConfig) {
    let interval = Interval::new(0.0, 1.0).expect("static");
    let fut = FamilyUnderTest {
        family_id: "mc-sample-mean".into(),
        index_kind: IndexKind::ByN,
        index_schedule: vec![1_000.0, 10_000.0, 100_000.0],
        discrete_apply: Box::new(move |idx, f| {
            let pdf = Pdf::uniform(interval)?;
            let run = crate::montecarlo::sample_mean_estimate(f, &pdf, idx as usize, 1)?;
            Ok(DiscreteOutput::Scalar(run.estimate))
        }),
        reference_apply: scalar_reference(),
        norm_of: Box::new(move |_idx| Ok(mc_norm_bound(&Pdf::uniform(interval)?))),
        dense_generators: monomial_generators(interval, 12),
        corpus: vec![make_monomial(1, interval), make_monomial(2, interval)],
        panel_apply: Some(Box::new(move |schedule, f| {
            let pdf = Pdf::uniform(interval)?;
            let ns: Vec<usize> = schedule.iter().map(|&x| x as usize).collect();
            let seeds = default_seed_panel();
            let table = convergence_trace(f, &pdf, &ns, &seeds)?;
            let mut per_index: Vec<Vec<f64>> = vec![Vec::with_capacity(seeds.len()); ns.len()];
            for row in &table.rows {
                let k = ns.iter().position(|n| *n == row.n).expect("schedule row");
                per_index[k].push(row.estimate);
            }
            Ok(per_index)
        })),
    };
    let config = AuditConfig {
        consistency_tol: 1e-2,
        convergence_tol: 1e-2,
        ..AuditConfig::default()
    };
    (fut, config)
}

/// Ids of the eight built-in families.
pub fn builtin_family_ids() -> [&'static str; 8] {
    [
        "gauss",
        "trapezoid",
        "newton-cotes",
        "forward-diff-c1",
        "forward-diff-sup",
        "interp-equispaced",
        "interp-chebyshev",
        "mc-sample-mean",
    ]
}

/// A built-in family together with its default thresholds.
pub fn builtin_family(id: &str) -> Result<(FamilyUnderTest, AuditConfig)> {
    match id {
        "gauss" => Ok(gauss_family()),
        "trapezoid" => Ok(trapezoid_family()),
        "newton-cotes" => Ok(newton_cotes_family()),
        "forward-diff-c1" => Ok(forward_diff_c1_family()),
        "forward-diff-sup" => Ok(forward_diff_sup_family()),
        "interp-equispaced" => Ok(interp_equispaced_family()),
        "interp-chebyshev" => Ok(interp_chebyshev_family()),
        "mc-sample-mean" => Ok(mc_family()),
        _ => Err(Error::InvalidArgument(format!(
            "unknown family `{id}`; expected one of {:?}",
            builtin_family_ids()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_helpers() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 4.0, 6.0, 8.0];
        let (slope, r2) = linear_regression(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);

        assert!(tail_settled(&[1.0, 0.5, 0.25, 0.125], 1e-6));
        assert!(tail_settled(&[1e-15, 3e-15, 2e-15], 1e-6)); // roundoff plateau
        assert!(!tail_settled(&[1.0, 0.9, 1.1, 1.3], 1e-6));
        assert!(tail_non_decreasing(&[0.5, 1.30, 1.28, 1.29], 0.1));
        assert!(!tail_non_decreasing(&[1.0, 0.5, 0.25], 0.1));
    }

    #[test]
    fn gauss_audit_is_yes_yes_yes() {
        let (fut, config) = builtin_family("gauss").unwrap();
        let report = run_audit(&fut, &config).unwrap();
        assert_eq!(report.verdicts.consistency.value, VerdictValue::Yes);
        assert_eq!(report.verdicts.stability.value, VerdictValue::Yes);
        assert_eq!(report.verdicts.convergence.value, VerdictValue::Yes);
        assert_eq!(report.theorem_check, TheoremCheck::ConsistentWithTheorem);
        assert!(!report.evidence.consistency.is_empty());
        assert!(!report.evidence.stability.is_empty());
        assert!(!report.evidence.convergence.is_empty());
    }

    #[test]
    fn newton_cotes_audit_is_yes_no_no() {
        let (fut, config) = builtin_family("newton-cotes").unwrap();
        let report = run_audit(&fut, &config).unwrap();
        assert_eq!(report.verdicts.consistency.value, VerdictValue::Yes);
        assert_eq!(report.verdicts.stability.value, VerdictValue::No);
        assert_eq!(report.verdicts.convergence.value, VerdictValue::No);
        assert_eq!(report.theorem_check, TheoremCheck::ConsistentWithTheorem);
    }

    #[test]
    fn synthetic_corruption_flags_contradiction() {
        // consistent (exact on generators), stable (constant norms), yet the
        // corpus probe is forced away from its reference: the truth table
        // must flag it.
        let interval = Interval::new(0.0, 1.0).unwrap();
        let corrupted = ScalarFunction::new("corrupted-probe", interval, 0, |x| x).with_integral(0.5);
        let fut = FamilyUnderTest {
            family_id: "synthetic-corrupted".into(),
            index_kind: IndexKind::ByN,
            index_schedule: vec![1.0, 2.0, 3.0, 4.0],
            discrete_apply: Box::new(|_idx, f| {
                let exact = f.exact_integral().unwrap();
                if f.id() == "corrupted-probe" {
                    Ok(DiscreteOutput::Scalar(exact + 1.0))
                } else {
                    Ok(DiscreteOutput::Scalar(exact))
                }
            }),
            reference_apply: scalar_reference(),
            norm_of: Box::new(|_| Ok(NormEstimate::exact(1.0))),
            dense_generators: monomial_generators(interval, 4),
            corpus: vec![corrupted],
            panel_apply: None,
        };
        let report = run_audit(&fut, &AuditConfig::default()).unwrap();
        assert_eq!(report.verdicts.consistency.value, VerdictValue::Yes);
        assert_eq!(report.verdicts.stability.value, VerdictValue::Yes);
        assert_eq!(report.verdicts.convergence.value, VerdictValue::No);
        assert_eq!(report.theorem_check, TheoremCheck::Contradiction);
    }

    #[test]
    fn audit_rejects_bad_schedules() {
        let (mut fut, config) = builtin_family("gauss").unwrap();
        fut.index_schedule = vec![8.0, 4.0];
        assert!(run_audit(&fut, &config).is_err());
        fut.index_schedule = vec![];
        assert!(run_audit(&fut, &config).is_err());
    }

    #[test]
    fn report_json_shape_and_determinism() {
        let (fut, config) = builtin_family("gauss").unwrap();
        let a = serde_json::to_string(&run_audit(&fut, &config).unwrap()).unwrap();
        let (fut2, config2) = builtin_family("gauss").unwrap();
        let b = serde_json::to_string(&run_audit(&fut2, &config2).unwrap()).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["family_id"], "gauss");
        assert_eq!(v["theorem_check"], "consistent_with_theorem");
        assert_eq!(v["verdicts"]["stability"]["value"], "yes");
        assert!(v["thresholds"]["growth_factor"].as_f64().unwrap() > 1.0);
    }

    #[test]
    fn verdict_monotonicity_yes_never_flips_to_no() {
        // shrinking tolerances may demote yes to inconclusive, never to no
        let (fut, config) = builtin_family("gauss").unwrap();
        let strict = AuditConfig {
            consistency_tol: config.consistency_tol * 1e-9,
            convergence_tol: config.convergence_tol * 1e-9,
            growth_factor: 1.0 + 1e-9,
            ..config.clone()
        };
        let base = run_audit(&fut, &config).unwrap();
        let (fut2, _) = builtin_family("gauss").unwrap();
        let tight = run_audit(&fut2, &strict).unwrap();
        for (old, new) in [
            (&base.verdicts.consistency, &tight.verdicts.consistency),
            (&base.verdicts.stability, &tight.verdicts.stability),
            (&base.verdicts.convergence, &tight.verdicts.convergence),
        ] {
            if old.value == VerdictValue::Yes {
                assert_ne!(new.value, VerdictValue::No);
            }
        }
    }

    #[test]
    fn evidence_csv_shape() {
        let (fut, config) = builtin_family("newton-cotes").unwrap();
        let report = run_audit(&fut, &config).unwrap();
        let csv = report.evidence_csv("stability").unwrap();
        assert!(csv.starts_with("probe,index,value\n"));
        assert_eq!(csv.lines().count(), 1 + report.index_schedule.len());
        assert!(report.evidence_csv("nonsense").is_none());
    }
}
