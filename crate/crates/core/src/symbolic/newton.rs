//! Newton-polygon analysis of positive branches of a bivariate polynomial.

use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::Zero;

use super::poly::RationalPoly;
use super::univariate::{positive_roots, RealAlgebraic, UniPoly};
use crate::rational::Q;

/// Possible limits of a positive branch `u(t)` with `P(u, t) = 0` as `t` tends to its limit.
#[derive(Clone, Debug, Default)]
pub struct Branches {
    pub to_infinity: bool,
    pub to_zero: bool,
    pub finite: Vec<RealAlgebraic>,
}

impl Branches {
    pub fn is_empty(&self) -> bool {
        !self.to_infinity && !self.to_zero && self.finite.is_empty()
    }
}

/// Where the parameter goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamLimit {
    Infinity,
    Zero,
}

/// Branch types of `p(u, t)` as `t → limit` with `u > 0`. Variables other than `u` and `t` must be absent.
pub fn branches(p: &RationalPoly, u: usize, t: usize, limit: ParamLimit) -> Branches {
    let mut points: Vec<(i64, i64, Q)> = Vec::new();
    for (m, c) in p.terms() {
        let b = m.0[t] as i64;
        points.push((m.0[u] as i64, if limit == ParamLimit::Infinity { b } else { -b }, c.clone()));
    }
    let mut out = Branches::default();
    if points.is_empty() {
        return out;
    }
    let mut slopes: BTreeSet<Ratio<i64>> = BTreeSet::new();
    slopes.insert(Ratio::zero());
    for (i, (a1, b1, _)) in points.iter().enumerate() {
        for (a2, b2, _) in &points[i + 1..] {
            if a1 != a2 {
                slopes.insert(Ratio::new(b1 - b2, a2 - a1));
            }
        }
    }
    for rho in slopes {
        let value = |a: i64, b: i64| Ratio::from_integer(a) * rho + Ratio::from_integer(b);
        let max = points.iter().map(|(a, b, _)| value(*a, *b)).max().expect("nonempty");
        let face: Vec<&(i64, i64, Q)> = points.iter().filter(|(a, b, _)| value(*a, *b) == max).collect();
        let distinct: BTreeSet<i64> = face.iter().map(|(a, _, _)| *a).collect();
        if distinct.len() < 2 {
            continue;
        }
        let top = *distinct.iter().next_back().expect("nonempty") as usize;
        let mut coeffs = vec![Q::zero(); top + 1];
        for (a, _, c) in &face {
            coeffs[*a as usize] += c;
        }
        let roots = positive_roots(&UniPoly::new(coeffs));
        if roots.is_empty() {
            continue;
        }
        if rho > Ratio::zero() {
            out.to_infinity = true;
        } else if rho < Ratio::zero() {
            out.to_zero = true;
        } else {
            out.finite = roots;
        }
    }
    out
}

/// Whether `value` is a possible finite positive limit of `u`.
pub fn admits_finite(b: &Branches, value: &RealAlgebraic) -> bool {
    b.finite.iter().any(|r| r.exact_eq(value))
}
