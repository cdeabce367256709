//! Empirical limit behaviour of a dose-response curve.

use serde::Serialize;

use super::sweep::DoseResponseCurve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    FinitePositiveLimit,
    DivergesToInfinity,
    DecaysToZero,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictOptions {
    /// Maximum relative change per decade over the tail window.
    pub plateau_tol: f64,
    pub zero_tol: f64,
    pub slope_tol: f64,
    /// Number of trailing points used for the tail.
    pub window: usize,
    pub min_points: usize,
    pub min_decades: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions { plateau_tol: 1e-3, zero_tol: 1e-7, slope_tol: 0.2, window: 6, min_points: 6, min_decades: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalVerdict {
    pub kind: VerdictKind,
    pub limit_estimate: Option<f64>,
    pub tail_slope: f64,
}

impl EmpiricalVerdict {
    fn inconclusive(tail_slope: f64) -> Self {
        EmpiricalVerdict { kind: VerdictKind::Inconclusive, limit_estimate: None, tail_slope }
    }
}

/// Least-squares slope of `ln v` against `ln λ`; NaN if a value is not positive.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 || points.iter().any(|&(_, v)| v <= 0.0) {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

pub fn empirical_verdict(curve: &DoseResponseCurve, opts: &VerdictOptions) -> EmpiricalVerdict {
    let points = curve.converged_points();
    if points.len() < opts.min_points.max(2) {
        return EmpiricalVerdict::inconclusive(f64::NAN);
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    if (last.0 / first.0).log10() < opts.min_decades {
        return EmpiricalVerdict::inconclusive(f64::NAN);
    }
    let tail = &points[points.len() - opts.window.clamp(2, points.len())..];
    let slope = log_log_slope(tail);
    let (w0, w1) = (tail[0], tail[tail.len() - 1]);
    let v_last = w1.1;
    let max = points.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let decreasing = w1.1 <= w0.1;

    if (v_last < opts.zero_tol && decreasing) || (slope < -opts.slope_tol && v_last < 1e-2 * max) {
        return EmpiricalVerdict { kind: VerdictKind::DecaysToZero, limit_estimate: None, tail_slope: slope };
    }
    let decades = (w1.0 / w0.0).log10();
    let change = (w1.1 - w0.1).abs() / v_last.abs().max(f64::MIN_POSITIVE) / decades.max(f64::MIN_POSITIVE);
    if v_last > opts.zero_tol && change < opts.plateau_tol {
        return EmpiricalVerdict { kind: VerdictKind::FinitePositiveLimit, limit_estimate: Some(v_last), tail_slope: slope };
    }
    if slope > opts.slope_tol && v_last > 10.0 * first.1 {
        return EmpiricalVerdict { kind: VerdictKind::DivergesToInfinity, limit_estimate: None, tail_slope: slope };
    }
    EmpiricalVerdict::inconclusive(slope)
}
