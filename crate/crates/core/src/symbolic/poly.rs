//! Sparse multivariate polynomials with rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::univariate::UniPoly;
use crate::rational::{format_rational, gcd_of_numerators, lcm_of_denominators, to_f64, Q};

pub type Vars = Arc<[String]>;

pub fn vars<S: AsRef<str>>(names: &[S]) -> Vars {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly {
    vars: Vars,
    terms: BTreeMap<Monomial, Q>,
}

impl RationalPoly {
    pub fn zero(vars: &Vars) -> Self {
        RationalPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Vars, c: Q) -> Self {
        let mut p = RationalPoly::zero(vars);
        p.add_term(Monomial::one(vars.len()), c);
        p
    }

    pub fn variable(vars: &Vars, index: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[index] = 1;
        RationalPoly::term(vars, e, Q::one())
    }

    pub fn term(vars: &Vars, exps: Vec<u32>, c: Q) -> Self {
        assert_eq!(exps.len(), vars.len());
        let mut p = RationalPoly::zero(vars);
        p.add_term(Monomial(exps), c);
        p
    }

    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = RationalPoly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len());
            p.add_term(Monomial(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_value(&self) -> Option<Q> {
        if self.is_zero() {
            return Some(Q::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).min().unwrap_or(0)
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.0[v] > 0)
    }

    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.nvars()).filter(|&v| self.uses_var(v)).collect()
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return RationalPoly::zero(&self.vars);
        }
        RationalPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn neg(&self) -> Self {
        RationalPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn add(&self, other: &RationalPoly) -> Self {
        debug_assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &RationalPoly) -> Self {
        debug_assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &RationalPoly) -> Self {
        debug_assert_eq!(self.vars, other.vars);
        let mut out = RationalPoly::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_term(&self, m: &Monomial, c: &Q) -> Self {
        RationalPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = RationalPoly::constant(&self.vars, Q::one());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Coefficients of powers of `v` (index = power); the coefficients do not involve `v`.
    pub fn coeffs_in(&self, v: usize) -> Vec<RationalPoly> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![RationalPoly::zero(&self.vars); deg + 1];
        for (m, c) in &self.terms {
            let k = m.0[v] as usize;
            let mut e = m.0.clone();
            e[v] = 0;
            out[k].add_term(Monomial(e), c.clone());
        }
        out
    }

    pub fn from_coeffs_in(vars: &Vars, v: usize, coeffs: &[RationalPoly]) -> Self {
        let mut out = RationalPoly::zero(vars);
        for (k, c) in coeffs.iter().enumerate() {
            for (m, val) in &c.terms {
                let mut e = m.0.clone();
                e[v] += k as u32;
                out.add_term(Monomial(e), val.clone());
            }
        }
        out
    }

    pub fn leading_coeff_in(&self, v: usize) -> RationalPoly {
        self.coeffs_in(v).pop().unwrap_or_else(|| RationalPoly::zero(&self.vars))
    }

    /// Replaces `v` by a polynomial.
    pub fn substitute(&self, v: usize, value: &RationalPoly) -> Self {
        let coeffs = self.coeffs_in(v);
        let mut acc = RationalPoly::zero(&self.vars);
        for c in coeffs.iter().rev() {
            acc = acc.mul(value).add(c);
        }
        acc
    }

    /// Replaces `v` by `num/den` and clears denominators: `Σ c_k num^k den^(deg-k)`.
    pub fn substitute_fraction(&self, v: usize, num: &RationalPoly, den: &RationalPoly) -> Self {
        let coeffs = self.coeffs_in(v);
        let deg = coeffs.len() - 1;
        let mut num_pows = vec![RationalPoly::constant(&self.vars, Q::one())];
        let mut den_pows = vec![RationalPoly::constant(&self.vars, Q::one())];
        for k in 1..=deg {
            num_pows.push(num_pows[k - 1].mul(num));
            den_pows.push(den_pows[k - 1].mul(den));
        }
        let mut acc = RationalPoly::zero(&self.vars);
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&c.mul(&num_pows[k]).mul(&den_pows[deg - k]));
        }
        acc
    }

    /// Substitutes the given values; unset variables stay symbolic.
    pub fn partial_eval(&self, values: &[Option<Q>]) -> Self {
        let mut out = RationalPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut e = m.0.clone();
            for (v, val) in values.iter().enumerate() {
                if let Some(x) = val {
                    if e[v] > 0 {
                        coeff *= num_traits::pow(x.clone(), e[v] as usize);
                        e[v] = 0;
                    }
                }
            }
            out.add_term(Monomial(e), coeff);
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.clone();
                for (v, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        t *= num_traits::pow(x[v].clone(), e as usize);
                    }
                }
                t
            })
            .sum()
    }

    /// Value and largest absolute term magnitude at a float point.
    pub fn eval_f64_with_scale(&self, x: &[f64]) -> (f64, f64) {
        let mut sum = 0.0;
        let mut scale: f64 = 0.0;
        for (m, c) in &self.terms {
            let mut t = to_f64(c);
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= x[v].powi(e as i32);
                }
            }
            sum += t;
            scale = scale.max(t.abs());
        }
        (sum, scale)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.eval_f64_with_scale(x).0
    }

    /// Componentwise minimum exponent over all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut min = vec![u32::MAX; self.nvars()];
        for m in self.terms.keys() {
            for (a, b) in min.iter_mut().zip(&m.0) {
                *a = (*a).min(*b);
            }
        }
        if self.terms.is_empty() {
            return Monomial::one(self.nvars());
        }
        Monomial(min)
    }

    pub fn div_monomial(&self, m: &Monomial) -> Self {
        RationalPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(k, v)| (k.div(m), v.clone())).collect() }
    }

    /// Exact quotient when `divisor` divides `self`.
    pub fn exact_div(&self, divisor: &RationalPoly) -> Option<RationalPoly> {
        let (lm, lc) = divisor.leading_term()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = RationalPoly::zero(&self.vars);
        let mut steps = 0usize;
        while let Some((m, c)) = rem.leading_term() {
            if !lm.divides(m) {
                return None;
            }
            let qm = m.div(&lm);
            let qc = c / &lc;
            rem = rem.sub(&divisor.mul_term(&qm, &qc));
            quot.add_term(qm, qc);
            steps += 1;
            if steps > 1_000_000 {
                return None;
            }
        }
        Some(quot)
    }

    /// Integer coefficients with gcd 1 and positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = lcm_of_denominators(self.terms.values());
        let lcm_q = Q::from_integer(lcm);
        let scaled: Vec<Q> = self.terms.values().map(|c| c * &lcm_q).collect();
        let g = gcd_of_numerators(&scaled);
        let mut factor = lcm_q / Q::from_integer(g);
        if self.leading_term().expect("nonzero").1.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// `Some(1)` or `Some(-1)` when all coefficients share that sign.
    pub fn coefficient_sign(&self) -> Option<i32> {
        if self.terms.values().all(Signed::is_positive) {
            Some(1)
        } else if self.terms.values().all(Signed::is_negative) {
            Some(-1)
        } else {
            None
        }
    }

    /// Rewrites into another variable space; `map[old] = new index`.
    pub fn remap(&self, new_vars: &Vars, map: &[Option<usize>]) -> Self {
        let mut out = RationalPoly::zero(new_vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_vars.len()];
            for (v, &k) in m.0.iter().enumerate() {
                if k > 0 {
                    let target = map[v].unwrap_or_else(|| panic!("variable {} has no image", self.vars[v]));
                    e[target] += k;
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Univariate view; panics if another variable is used.
    pub fn to_univariate(&self, v: usize) -> UniPoly {
        let deg = self.degree_in(v) as usize;
        let mut coeffs = vec![Q::zero(); deg + 1];
        for (m, c) in &self.terms {
            assert!(m.0.iter().enumerate().all(|(i, &e)| i == v || e == 0), "not univariate in {}", self.vars[v]);
            coeffs[m.0[v] as usize] += c;
        }
        UniPoly::new(coeffs)
    }

    pub fn from_univariate(vars: &Vars, v: usize, p: &UniPoly) -> Self {
        let mut out = RationalPoly::zero(vars);
        for (k, c) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; vars.len()];
            e[v] = k as u32;
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    pub fn derivative(&self, v: usize) -> Self {
        let mut out = RationalPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.0[v] == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[v] -= 1;
            out.add_term(Monomial(e), c * Q::from_integer(BigInt::from(m.0[v])));
        }
        out
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            for (v, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars[v].clone()),
                    _ => factors.push(format!("{}^{e}", self.vars[v])),
                }
            }
            let body = if factors.is_empty() {
                format_rational(&mag)
            } else if mag.is_one() {
                factors.join("*")
            } else {
                format!("{}*{}", format_rational(&mag), factors.join("*"))
            };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Determinant by fraction-free elimination; entries live in an integral domain.
fn bareiss_det(mut m: Vec<Vec<RationalPoly>>, vars: &Vars) -> Option<RationalPoly> {
    let n = m.len();
    if n == 0 {
        return Some(RationalPoly::constant(vars, Q::one()));
    }
    let mut sign = Q::one();
    let mut prev = RationalPoly::constant(vars, Q::one());
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&i| !m[i][k].is_zero());
            match swap {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return Some(RationalPoly::zero(vars)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.exact_div(&prev)?;
            }
        }
        prev = m[k][k].clone();
        for row in m.iter_mut().skip(k + 1) {
            row[k] = RationalPoly::zero(vars);
        }
    }
    Some(m[n - 1][n - 1].scale(&sign))
}

/// Resultant of `a` and `b` with respect to `v`.
pub fn resultant(a: &RationalPoly, b: &RationalPoly, v: usize) -> Option<RationalPoly> {
    let vars = a.vars().clone();
    let ca = a.coeffs_in(v);
    let cb = b.coeffs_in(v);
    let (m, n) = (ca.len() - 1, cb.len() - 1);
    if m == 0 && n == 0 {
        return Some(RationalPoly::constant(&vars, Q::one()));
    }
    if m == 0 {
        return Some(ca[0].pow(n as u32));
    }
    if n == 0 {
        return Some(cb[0].pow(m as u32));
    }
    let size = m + n;
    let zero = RationalPoly::zero(&vars);
    let mut rows = vec![vec![zero.clone(); size]; size];
    for i in 0..n {
        for (k, c) in ca.iter().enumerate() {
            rows[i][i + (m - k)] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in cb.iter().enumerate() {
            rows[n + i][i + (n - k)] = c.clone();
        }
    }
    bareiss_det(rows, &vars)
}
