//! Forward, backward, central and second-central difference operators on
//! shrunk valid intervals, their C^k-norm stability certificates, the
//! sup-norm instability witness family, and h-refinement convergence studies.

use crate::error::{Error, Result};
use crate::funcspace::{
    make_sine_probe, sup_norm, Interval, NormEstimate, ScalarFunction, DEFAULT_SUP_RESOLUTION,
};
use serde::Serialize;

/// Finite-difference stencil. The first three approximate f'; the last
/// approximates f''.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Forward,
    Backward,
    Central,
    SecondCentral,
}

impl Stencil {
    pub fn order(&self) -> usize {
        match self {
            Stencil::SecondCentral => 2,
            _ => 1,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stencil::Forward => "forward",
            Stencil::Backward => "backward",
            Stencil::Central => "central",
            Stencil::SecondCentral => "second_central",
        }
    }
}

/// A difference operator with step h ∈ (0, 1). The valid interval is the
/// source interval shrunk so every stencil point stays inside it.
#[derive(Debug, Clone, Copy)]
pub struct DifferenceOperator {
    stencil: Stencil,
    step_h: f64,
    source_interval: Interval,
    valid_interval: Interval,
}

impl DifferenceOperator {
    pub fn new(stencil: Stencil, step_h: f64, source_interval: Interval) -> Result<Self> {
        if !(step_h > 0.0 && step_h < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "difference step must lie in (0, 1), got {step_h}"
            )));
        }
        let (a, b) = (source_interval.a(), source_interval.b());
        let valid_interval = match stencil {
            Stencil::Forward => Interval::new(a, b - step_h),
            Stencil::Backward => Interval::new(a + step_h, b),
            Stencil::Central | Stencil::SecondCentral => Interval::new(a + step_h, b - step_h),
        }
        .map_err(|_| {
            Error::InvalidArgument(format!(
                "step {step_h} leaves no valid interval inside {source_interval}"
            ))
        })?;
        Ok(Self {
            stencil,
            step_h,
            source_interval,
            valid_interval,
        })
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn order(&self) -> usize {
        self.stencil.order()
    }

    pub fn step_h(&self) -> f64 {
        self.step_h
    }

    pub fn source_interval(&self) -> Interval {
        self.source_interval
    }

    pub fn valid_interval(&self) -> Interval {
        self.valid_interval
    }
}

/// Apply the difference operator: the quotient is returned as a function on
/// the valid interval (evaluation outside it errors, like any domain
/// violation). The input's domain must cover the operator's source interval.
pub fn apply_diff(op: &DifferenceOperator, f: &ScalarFunction) -> Result<ScalarFunction> {
    if !f.domain().covers(&op.source_interval) {
        return Err(Error::DomainMismatch {
            id: f.id().to_string(),
            a: op.source_interval.a(),
            b: op.source_interval.b(),
        });
    }
    let h = op.step_h;
    let stencil = op.stencil;
    let g = f.clone();
    // out-of-source evaluations surface as NaN and are rejected by eval()
    let raw = move |x: f64| g.eval_unchecked(x).unwrap_or(f64::NAN);
    let evaluator = move |x: f64| match stencil {
        Stencil::Forward => (raw(x + h) - raw(x)) / h,
        Stencil::Backward => (raw(x) - raw(x - h)) / h,
        Stencil::Central => (raw(x + h) - raw(x - h)) / (2.0 * h),
        Stencil::SecondCentral => (raw(x + h) - 2.0 * raw(x) + raw(x - h)) / (h * h),
    };
    Ok(ScalarFunction::new(
        format!("D[{};h={}]({})", stencil.as_str(), h, f.id()),
        op.valid_interval,
        f.smoothness().saturating_sub(op.order()),
        evaluator,
    ))
}

/// The C¹ stability certificate ‖D_h‖ ≤ 1 for first-order stencils, uniform
/// in h (mean value theorem). Exact, not sampled.
pub fn c1_norm_certificate(op: &DifferenceOperator) -> Result<NormEstimate> {
    if op.order() != 1 {
        return Err(Error::InvalidArgument(format!(
            "C1 certificate applies to first-order stencils, got {}",
            op.stencil.as_str()
        )));
    }
    Ok(NormEstimate::exact(1.0))
}

/// The C² stability certificate ‖D_h⁽²⁾‖ ≤ 1 for the second-central stencil,
/// uniform in h.
pub fn c2_norm_certificate(op: &DifferenceOperator) -> Result<NormEstimate> {
    if op.stencil != Stencil::SecondCentral {
        return Err(Error::InvalidArgument(format!(
            "C2 certificate applies to the second_central stencil, got {}",
            op.stencil.as_str()
        )));
    }
    Ok(NormEstimate::exact(1.0))
}

/// Step divisor used when probing the sine witness: differencing
/// g_h(x) = sin(2πx/h) with a step equal to its own period h telescopes to
/// zero (sin(θ + 2π) = sin θ), so the probe must resolve the period. With
/// step h/1024 the measured ratio is (2π/h)·sinc(π/1024), within 2e-6 of the
/// closed form 2π/h.
pub const BLOWUP_PROBE_DIVISOR: f64 = 1024.0;

/// Sup-norm instability witness: returns g_h(x) = sin(2πx/h) together with
/// the measured ratio ‖D g_h‖_∞ / ‖g_h‖_∞ ≈ 2π/h, certifying that no
/// h-independent sup-norm bound exists for the differencing family
/// (the ratio exceeds 1/h for every h in (0,1)).
pub fn sup_norm_blowup(h: f64, domain: Interval) -> Result<(ScalarFunction, f64)> {
    let witness = make_sine_probe(h, domain)?;
    let op = DifferenceOperator::new(Stencil::Forward, h / BLOWUP_PROBE_DIVISOR, domain)?;
    let image = apply_diff(&op, &witness)?;
    let num = sup_norm(&image, DEFAULT_SUP_RESOLUTION)?.value;
    let den = sup_norm(&witness, DEFAULT_SUP_RESOLUTION)?.value;
    Ok((witness, num / den))
}

/// Measured lower bound for ‖D_h‖ on (C¹, ‖·‖_∞): applies the operator with
/// its own step h to the half-period witness g_{2h}, for which the quotient
/// is exactly -2·sin(πx/h)/h. The measured value 2/h is the attained
/// operator norm. Requires h < 1/2 so the witness parameter 2h stays in (0,1).
pub fn sup_norm_probe_lower_bound(h: f64, domain: Interval) -> Result<f64> {
    let witness = make_sine_probe(2.0 * h, domain)?;
    let op = DifferenceOperator::new(Stencil::Forward, h, domain)?;
    let image = apply_diff(&op, &witness)?;
    let num = sup_norm(&image, DEFAULT_SUP_RESOLUTION)?.value;
    let den = sup_norm(&witness, DEFAULT_SUP_RESOLUTION)?.value;
    Ok(num / den)
}

/// One row of an h-refinement study.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub h: f64,
    pub sup_error: f64,
}

/// Sup-norm errors of the difference quotient against the exact derivative,
/// one row per step in the schedule.
#[derive(Debug, Clone, Serialize)]
pub struct StudyTable {
    pub stencil: Stencil,
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    /// CSV with header `h,sup_error,ratio_prev` where ratio_prev is the
    /// previous row's error divided by this row's (empty on the first row).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,sup_error,ratio_prev\n");
        let mut prev: Option<f64> = None;
        for r in &self.rows {
            let ratio = prev
                .map(|p| (p / r.sup_error).to_string())
                .unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", r.h, r.sup_error, ratio));
            prev = Some(r.sup_error);
        }
        out
    }

    /// Consecutive error ratios e(h_{k-1}) / e(h_k).
    pub fn ratios(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[0].sup_error / w[1].sup_error)
            .collect()
    }
}

/// Error study over an h schedule: sup-norm of (difference quotient − exact
/// k-th derivative) on the valid interval. The function must carry exact
/// derivatives to the stencil's order.
pub fn convergence_study(
    stencil: Stencil,
    f: &ScalarFunction,
    h_schedule: &[f64],
) -> Result<StudyTable> {
    if h_schedule.is_empty() {
        return Err(Error::InvalidArgument("empty h schedule".into()));
    }
    let need = stencil.order();
    let have = f.derivative_chain_len();
    if have < need {
        return Err(Error::MissingDerivativeChain { have, need });
    }
    let mut target = f;
    for _ in 0..need {
        target = target.exact_derivative().expect("chain length checked");
    }
    let mut rows = Vec::with_capacity(h_schedule.len());
    for &h in h_schedule {
        let op = DifferenceOperator::new(stencil, h, f.domain())?;
        let image = apply_diff(&op, f)?;
        let diff = ScalarFunction::linear_combination(1.0, &image, -1.0, target)?;
        let sup_error = sup_norm(&diff, DEFAULT_SUP_RESOLUTION)?.value;
        rows.push(StudyRow { h, sup_error });
    }
    Ok(StudyTable { stencil, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{ck_norm, make_monomial, make_sine};
    use std::f64::consts::PI;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn valid_intervals_shrink_per_stencil() {
        let src = Interval::new(0.0, 1.0).unwrap();
        let f = DifferenceOperator::new(Stencil::Forward, 0.1, src).unwrap();
        assert_eq!((f.valid_interval().a(), f.valid_interval().b()), (0.0, 0.9));
        let b = DifferenceOperator::new(Stencil::Backward, 0.1, src).unwrap();
        assert_eq!((b.valid_interval().a(), b.valid_interval().b()), (0.1, 1.0));
        let c = DifferenceOperator::new(Stencil::SecondCentral, 0.1, src).unwrap();
        assert_eq!((c.valid_interval().a(), c.valid_interval().b()), (0.1, 0.9));
        assert!(DifferenceOperator::new(Stencil::Forward, 0.0, src).is_err());
        assert!(DifferenceOperator::new(Stencil::Forward, 1.0, src).is_err());
        assert!(DifferenceOperator::new(Stencil::Central, 0.6, src).is_err());
    }

    #[test]
    fn forward_exact_on_linear() {
        let f = make_monomial(1, unit());
        for h in [0.3, 0.01, 1e-4] {
            let op = DifferenceOperator::new(Stencil::Forward, h, unit()).unwrap();
            let d = apply_diff(&op, &f).unwrap();
            for x in [0.0, 0.2, 0.5] {
                assert!((d.eval(x).unwrap() - 1.0).abs() < 1e-11, "h={h} x={x}");
            }
        }
    }

    #[test]
    fn second_central_exact_on_quadratic() {
        let f = make_monomial(2, unit());
        for h in [0.25, 0.01] {
            let op = DifferenceOperator::new(Stencil::SecondCentral, h, unit()).unwrap();
            let d = apply_diff(&op, &f).unwrap();
            for x in [0.3, 0.5, 0.7] {
                assert!((d.eval(x).unwrap() - 2.0).abs() < 1e-9, "h={h} x={x}");
            }
        }
    }

    #[test]
    fn evaluation_outside_valid_interval_errors() {
        let f = make_monomial(2, unit());
        let op = DifferenceOperator::new(Stencil::Forward, 0.2, unit()).unwrap();
        let d = apply_diff(&op, &f).unwrap();
        assert!(d.eval(0.95).is_err());
    }

    #[test]
    fn forward_sine_error_within_taylor_bound() {
        let f = make_sine();
        let h = 1e-3;
        let op = DifferenceOperator::new(Stencil::Forward, h, unit()).unwrap();
        let d = apply_diff(&op, &f).unwrap();
        let diff =
            ScalarFunction::linear_combination(1.0, &d, -1.0, f.exact_derivative().unwrap())
                .unwrap();
        let err = sup_norm(&diff, DEFAULT_SUP_RESOLUTION).unwrap().value;
        // |f''| ≤ sin(1) on [0,1]; remainder bound h/2 · sup|f''|
        let bound = 0.5 * h * 1f64.sin() + 1e-10;
        assert!(err <= bound, "err {err} bound {bound}");
    }

    #[test]
    fn certificates_are_one_and_reject_wrong_stencils() {
        let src = unit();
        for stencil in [Stencil::Forward, Stencil::Backward, Stencil::Central] {
            for h in [0.3, 0.05, 0.001] {
                let op = DifferenceOperator::new(stencil, h, src).unwrap();
                assert_eq!(c1_norm_certificate(&op).unwrap().value, 1.0);
                assert!(c2_norm_certificate(&op).is_err());
            }
        }
        let op2 = DifferenceOperator::new(Stencil::SecondCentral, 0.1, src).unwrap();
        assert_eq!(c2_norm_certificate(&op2).unwrap().value, 1.0);
        assert!(c1_norm_certificate(&op2).is_err());
    }

    #[test]
    fn c1_certificate_upper_bound_and_near_sharpness() {
        let h = 0.01;
        let op = DifferenceOperator::new(Stencil::Forward, h, unit()).unwrap();
        let corpus = [make_monomial(1, unit()), make_monomial(3, unit()), make_sine()];
        let mut best = 0.0f64;
        for f in &corpus {
            let image = apply_diff(&op, f).unwrap();
            let num = sup_norm(&image, DEFAULT_SUP_RESOLUTION).unwrap().value;
            let den = ck_norm(f, 1, DEFAULT_SUP_RESOLUTION).unwrap().value;
            let ratio = num / den;
            assert!(ratio <= 1.0 + 1e-10, "{}: ratio {ratio}", f.id());
            best = best.max(ratio);
        }
        // f(x) = x reaches ‖D_h f‖/‖f‖_C1 = 1/2
        assert!(best >= 0.45, "best ratio {best}");
    }

    #[test]
    fn blowup_matches_closed_form() {
        let domain = unit();
        for h in [0.2, 0.1, 0.05, 0.02] {
            let (_, ratio) = sup_norm_blowup(h, domain).unwrap();
            let rel = (ratio * h - 2.0 * PI).abs() / (2.0 * PI);
            assert!(rel < 0.02, "h={h}: ratio*h = {}", ratio * h);
            assert!(ratio > 1.0 / h, "h={h}: ratio {ratio}");
        }
        let (_, r_001) = sup_norm_blowup(0.01, domain).unwrap();
        assert!(r_001 >= 100.0);
    }

    #[test]
    fn blowup_doubling_law() {
        let domain = unit();
        let (_, r1) = sup_norm_blowup(0.1, domain).unwrap();
        let (_, r2) = sup_norm_blowup(0.05, domain).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 0.1, "doubling ratio {}", r2 / r1);
    }

    #[test]
    fn probe_lower_bound_is_two_over_h() {
        for h in [0.2, 0.1, 0.05] {
            let lb = sup_norm_probe_lower_bound(h, unit()).unwrap();
            assert!(
                (lb * h - 2.0).abs() < 1e-6,
                "h={h}: lb*h = {}",
                lb * h
            );
        }
    }

    #[test]
    fn study_linear_is_roundoff_flat() {
        let f = make_monomial(1, unit());
        let table = convergence_study(Stencil::Forward, &f, &[0.1, 0.05, 0.025]).unwrap();
        for r in &table.rows {
            assert!(r.sup_error < 1e-11, "h={} err={}", r.h, r.sup_error);
        }
    }

    #[test]
    fn study_first_and_second_order_rates() {
        let f = make_sine();
        let hs: Vec<f64> = (0..6).map(|k| 1e-2 / 2f64.powi(k)).collect();
        let table = convergence_study(Stencil::Forward, &f, &hs).unwrap();
        for r in table.ratios() {
            assert!((1.8..=2.2).contains(&r), "first-order ratio {r}");
        }
        let hs2: Vec<f64> = (0..5).map(|k| 1e-1 / 2f64.powi(k)).collect();
        let table2 = convergence_study(Stencil::SecondCentral, &f, &hs2).unwrap();
        for r in table2.ratios() {
            assert!((3.5..=4.5).contains(&r), "second-order ratio {r}");
        }
    }

    #[test]
    fn study_missing_chain_errors() {
        let plain = ScalarFunction::new("plain", unit(), 5, |x| x * x);
        assert!(matches!(
            convergence_study(Stencil::Forward, &plain, &[0.1]),
            Err(Error::MissingDerivativeChain { .. })
        ));
    }

    #[test]
    fn linearity_pointwise() {
        let f = make_monomial(3, unit());
        let g = make_sine();
        let combo = ScalarFunction::linear_combination(1.5, &f, -2.0, &g).unwrap();
        let op = DifferenceOperator::new(Stencil::Central, 0.05, unit()).unwrap();
        let dc = apply_diff(&op, &combo).unwrap();
        let df = apply_diff(&op, &f).unwrap();
        let dg = apply_diff(&op, &g).unwrap();
        for x in [0.1, 0.33, 0.5, 0.9] {
            let lhs = dc.eval(x).unwrap();
            let rhs = 1.5 * df.eval(x).unwrap() - 2.0 * dg.eval(x).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0),
                "x={x}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn csv_shape() {
        let f = make_sine();
        let table = convergence_study(Stencil::Forward, &f, &[0.02, 0.01]).unwrap();
        let csv = table.to_csv();
        assert!(csv.starts_with("h,sup_error,ratio_prev\n"));
        let second_row = csv.lines().nth(2).unwrap();
        assert!(second_row.starts_with("0.01,"));
        assert_eq!(second_row.split(',').count(), 3);
    }
}
