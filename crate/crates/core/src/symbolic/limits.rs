//! Root analysis of `q`, certified limits and limit propagation through a parametrization.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use super::elimination::SteadyStateParametrization;
use super::newton::{branches, Branches, ParamLimit};
use super::poly::RationalPoly;
use super::univariate::{nonneg_roots, positive_roots, RealAlgebraic, UniPoly};
use super::ElimPolynomial;
use crate::numeric::{EmpiricalVerdict, VerdictKind};
use crate::rational::Q;

#[derive(Clone, Debug)]
pub struct RootReport {
    pub nonneg_roots: Vec<RealAlgebraic>,
    pub has_zero_root: bool,
    pub has_positive_root: bool,
}

pub fn analyze_roots(q: &UniPoly) -> RootReport {
    let nonneg_roots = nonneg_roots(q);
    let has_zero_root = nonneg_roots.iter().any(RealAlgebraic::is_zero);
    let has_positive_root = nonneg_roots.iter().any(|r| !r.is_zero());
    RootReport { nonneg_roots, has_zero_root, has_positive_root }
}

/// Limit of a positive quantity.
#[derive(Clone, Debug)]
pub enum LimitValue {
    Zero,
    Infinity,
    /// Positive and finite.
    Finite(RealAlgebraic),
}

impl LimitValue {
    pub fn same(&self, other: &LimitValue) -> bool {
        match (self, other) {
            (LimitValue::Zero, LimitValue::Zero) | (LimitValue::Infinity, LimitValue::Infinity) => true,
            (LimitValue::Finite(a), LimitValue::Finite(b)) => a.exact_eq(b),
            _ => false,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LimitValue::Zero => 0.0,
            LimitValue::Infinity => f64::INFINITY,
            LimitValue::Finite(r) => r.to_f64(),
        }
    }
}

impl fmt::Display for LimitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitValue::Zero => f.write_str("0"),
            LimitValue::Infinity => f.write_str("inf"),
            LimitValue::Finite(r) => write!(f, "{r}"),
        }
    }
}

pub fn push_unique(set: &mut Vec<LimitValue>, value: LimitValue) {
    if !set.iter().any(|v| v.same(&value)) {
        set.push(value);
    }
}

#[derive(Clone, Debug)]
pub enum CertifiedLimit {
    ExactLimit(RealAlgebraic),
    Infinity,
    Zero,
    EventuallyConstant(RealAlgebraic),
    Ambiguous(Vec<LimitValue>),
}

fn branch_values(b: &Branches) -> Vec<LimitValue> {
    let mut out = Vec::new();
    if b.to_zero {
        out.push(LimitValue::Zero);
    }
    out.extend(b.finite.iter().cloned().map(LimitValue::Finite));
    if b.to_infinity {
        out.push(LimitValue::Infinity);
    }
    out
}

/// Possible limits of the output along the dose-response curve.
///
/// `bounded` removes infinity when a positive law containing the output does not contain the input.
pub fn limit_candidates(elim: &ElimPolynomial, bounded: bool) -> Vec<LimitValue> {
    let mut set = branch_values(&branches(&elim.specialized, 0, 1, ParamLimit::Infinity));
    if let Some(g) = &elim.constant_factor {
        for r in positive_roots(g) {
            push_unique(&mut set, LimitValue::Finite(r));
        }
    }
    for aux in &elim.auxiliary {
        let allowed = branch_values(&branches(aux, 0, 1, ParamLimit::Infinity));
        set.retain(|v| allowed.iter().any(|a| a.same(v)));
    }
    if bounded {
        set.retain(|v| !matches!(v, LimitValue::Infinity));
    }
    set
}

/// The single candidate consistent with a numeric verdict, if any.
pub fn resolve_with_hint(candidates: &[LimitValue], hint: Option<&EmpiricalVerdict>) -> Option<LimitValue> {
    let hint = hint?;
    let matching: Vec<&LimitValue> = candidates.iter().filter(|c| verdict_agrees(c, hint) == Some(true)).collect();
    (matching.len() == 1).then(|| matching[0].clone())
}

/// Whether a numeric verdict supports `value`; `None` when the verdict is inconclusive.
pub fn verdict_agrees(value: &LimitValue, verdict: &EmpiricalVerdict) -> Option<bool> {
    Some(match (&verdict.kind, value) {
        (VerdictKind::Inconclusive, _) => return None,
        (VerdictKind::DivergesToInfinity, LimitValue::Infinity) => true,
        (VerdictKind::DecaysToZero, LimitValue::Zero) => true,
        (VerdictKind::FinitePositiveLimit, LimitValue::Finite(r)) => {
            let est = verdict.limit_estimate.unwrap_or(f64::NAN);
            let v = r.to_f64();
            (v - est).abs() <= 1e-2 * v.abs()
        }
        _ => false,
    })
}

fn to_certified(v: LimitValue) -> CertifiedLimit {
    match v {
        LimitValue::Zero => CertifiedLimit::Zero,
        LimitValue::Infinity => CertifiedLimit::Infinity,
        LimitValue::Finite(r) => CertifiedLimit::ExactLimit(r),
    }
}

/// Whether the output is eventually equal to `r`: `r` is a root of the λ-free factor and no other branch tends to it.
fn eventually_constant_at(elim: &ElimPolynomial, r: &RealAlgebraic) -> bool {
    let Some(g) = &elim.constant_factor else { return false };
    if !r.is_root_of(g) {
        return false;
    }
    let vars = elim.specialized.vars().clone();
    let Some(cofactor) = elim.specialized.exact_div(&RationalPoly::from_univariate(&vars, 0, g)) else {
        return false;
    };
    if !cofactor.uses_var(1) {
        return true;
    }
    let lead = cofactor.coeffs_in(1).pop().expect("nonzero").to_univariate(0);
    !r.is_root_of(&lead)
}

/// Decides the limit from an already restricted candidate set.
pub fn certify_candidates(
    elim: &ElimPolynomial,
    candidates: &[LimitValue],
    numeric_hint: Option<&EmpiricalVerdict>,
) -> CertifiedLimit {
    let chosen = if candidates.len() == 1 {
        Some(candidates[0].clone())
    } else {
        resolve_with_hint(candidates, numeric_hint)
    };
    match chosen {
        Some(LimitValue::Finite(r)) if !elim.lambda_dependent || eventually_constant_at(elim, &r) => {
            CertifiedLimit::EventuallyConstant(r)
        }
        Some(v) => to_certified(v),
        None => CertifiedLimit::Ambiguous(candidates.to_vec()),
    }
}

/// Decides the limit of one dose-response curve from its elimination polynomial.
///
/// `positive_support` is true when a positive law contains the output but not the input.
pub fn certified_limit(
    elim: &ElimPolynomial,
    report: &RootReport,
    positive_support: bool,
    numeric_hint: Option<&EmpiricalVerdict>,
) -> CertifiedLimit {
    if !elim.lambda_dependent {
        let positive: Vec<LimitValue> =
            report.nonneg_roots.iter().filter(|r| !r.is_zero()).cloned().map(LimitValue::Finite).collect();
        return certify_candidates(elim, &positive, numeric_hint);
    }
    certify_candidates(elim, &limit_candidates(elim, positive_support), numeric_hint)
}

#[derive(Clone, Debug)]
enum Behaviour {
    Zero,
    Infinite,
    Finite(Q),
    Unknown,
}

fn behaviour(p: &RationalPoly, known: &[Option<&LimitValue>]) -> Behaviour {
    let mut values: Vec<Option<Q>> = vec![None; p.nvars()];
    let mut open: Vec<usize> = Vec::new();
    for v in p.used_vars() {
        match known.get(v).copied().flatten() {
            Some(LimitValue::Finite(r)) => match r.as_rational() {
                Some(x) => values[v] = Some(x.clone()),
                None => return Behaviour::Unknown,
            },
            Some(_) => open.push(v),
            None => return Behaviour::Unknown,
        }
    }
    let reduced = p.partial_eval(&values);
    if reduced.is_zero() {
        return Behaviour::Zero;
    }
    if open.is_empty() {
        return Behaviour::Finite(reduced.constant_value().expect("all variables evaluated"));
    }
    if open.len() == 1 {
        let v = open[0];
        let coeffs = reduced.coeffs_in(v);
        let to_inf = matches!(known[v], Some(LimitValue::Infinity));
        let k = if to_inf {
            coeffs.iter().rposition(|c| !c.is_zero())
        } else {
            coeffs.iter().position(|c| !c.is_zero())
        }
        .expect("nonzero polynomial");
        let c = coeffs[k].constant_value().expect("single open variable");
        return match (k, to_inf) {
            (0, _) => Behaviour::Finite(c),
            (_, true) if c.is_positive() => Behaviour::Infinite,
            (_, true) => Behaviour::Unknown,
            (_, false) => Behaviour::Zero,
        };
    }
    let mut finite = Q::zero();
    let mut inf_sign = 0;
    for (m, c) in reduced.terms() {
        let has_inf = open.iter().any(|&v| m.0[v] > 0 && matches!(known[v], Some(LimitValue::Infinity)));
        let has_zero = open.iter().any(|&v| m.0[v] > 0 && matches!(known[v], Some(LimitValue::Zero)));
        match (has_inf, has_zero) {
            (true, true) => return Behaviour::Unknown,
            (true, false) => {
                let s = if c.is_positive() { 1 } else { -1 };
                if inf_sign != 0 && inf_sign != s {
                    return Behaviour::Unknown;
                }
                inf_sign = s;
            }
            (false, true) => {}
            (false, false) => finite += c,
        }
    }
    if inf_sign > 0 {
        Behaviour::Infinite
    } else if inf_sign < 0 {
        Behaviour::Unknown
    } else if finite.is_zero() {
        Behaviour::Zero
    } else {
        Behaviour::Finite(finite)
    }
}

/// Limits of the solved species given limits of the free ones; `None` marks an indeterminate form.
pub fn propagate_limits(
    param: &SteadyStateParametrization,
    known: &BTreeMap<usize, LimitValue>,
) -> BTreeMap<usize, Option<LimitValue>> {
    let nvars = param.vars.len();
    let lookup: Vec<Option<&LimitValue>> = (0..nvars).map(|v| known.get(&v)).collect();
    let mut out = BTreeMap::new();
    for (&s, (num, den)) in &param.solved {
        let limit = match (behaviour(num, &lookup), behaviour(den, &lookup)) {
            (Behaviour::Infinite, Behaviour::Finite(d)) if d.is_positive() => Some(LimitValue::Infinity),
            (Behaviour::Infinite, Behaviour::Zero) => Some(LimitValue::Infinity),
            (Behaviour::Finite(n), Behaviour::Zero) if !n.is_zero() => Some(LimitValue::Infinity),
            (Behaviour::Zero, Behaviour::Finite(d)) if !d.is_zero() => Some(LimitValue::Zero),
            (Behaviour::Zero, Behaviour::Infinite) => Some(LimitValue::Zero),
            (Behaviour::Finite(_), Behaviour::Infinite) => Some(LimitValue::Zero),
            (Behaviour::Finite(n), Behaviour::Finite(d)) if !d.is_zero() => {
                let v = n / d;
                if v.is_positive() {
                    Some(LimitValue::Finite(RealAlgebraic::Rational(v)))
                } else if v.is_zero() {
                    Some(LimitValue::Zero)
                } else {
                    None
                }
            }
            _ => None,
        };
        out.insert(s, limit);
    }
    for (&s, v) in known {
        out.insert(s, Some(v.clone()));
    }
    out
}
