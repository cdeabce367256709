//! Dense univariate polynomials over Q, Sturm sequences and isolated real roots.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, simplest_between, to_f64, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniPoly {
    /// Coefficients from the constant term upwards; no trailing zeros.
    coeffs: Vec<Q>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Q) -> Self {
        UniPoly::new(vec![c])
    }

    /// `x - r`
    pub fn linear_root(r: &Q) -> Self {
        UniPoly::new(vec![-r.clone(), Q::one()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| Q::from_integer(BigInt::from(c))).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn sign_at(&self, x: &Q) -> i32 {
        sign(&self.eval(x))
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(
            self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * Q::from_integer(BigInt::from(k))).collect(),
        )
    }

    pub fn scale(&self, s: &Q) -> Self {
        UniPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn neg(&self) -> Self {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn mul(&self, other: &UniPoly) -> Self {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.coeffs.len() - 1;
        let lead_inv = divisor.leading().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &c * dc;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    pub fn rem(&self, divisor: &UniPoly) -> UniPoly {
        self.div_rem(divisor).1
    }

    /// Monic gcd; zero only if both are zero.
    pub fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = x.rem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    pub fn squarefree(&self) -> UniPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = UniPoly::gcd(self, &self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Removes factors of `x`; returns the multiplicity removed.
    pub fn strip_zero_roots(&self) -> (UniPoly, usize) {
        let k = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if self.is_zero() {
            return (self.clone(), 0);
        }
        (UniPoly { coeffs: self.coeffs[k..].to_vec() }, k)
    }

    pub fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone()];
        if self.degree().unwrap_or(0) == 0 {
            return seq;
        }
        seq.push(self.derivative());
        loop {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        seq
    }

    /// Cauchy bound: every real root has absolute value strictly below it.
    pub fn root_bound(&self) -> Q {
        let lead = self.leading().abs();
        let mut max = Q::zero();
        for c in &self.coeffs[..self.coeffs.len().saturating_sub(1)] {
            let r = c.abs() / &lead;
            if r > max {
                max = r;
            }
        }
        max + Q::one()
    }

    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = match k {
                0 => format_rational(&mag),
                _ => {
                    let pw = if k == 1 { var.to_string() } else { format!("{var}^{k}") };
                    if mag.is_one() {
                        pw
                    } else {
                        format!("{}*{pw}", format_rational(&mag))
                    }
                }
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

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

fn sign(q: &Q) -> i32 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

fn variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

pub struct Sturm {
    seq: Vec<UniPoly>,
}

impl Sturm {
    pub fn new(p: &UniPoly) -> Self {
        Sturm { seq: p.sturm_sequence() }
    }

    pub fn variations_at(&self, x: &Q) -> usize {
        variations(self.seq.iter().map(|p| p.sign_at(x)))
    }

    pub fn variations_at_infinity(&self) -> usize {
        variations(self.seq.iter().map(|p| sign(&p.leading())))
    }

    /// Distinct roots in `(lo, hi]`.
    pub fn count(&self, lo: &Q, hi: &Q) -> usize {
        self.variations_at(lo).saturating_sub(self.variations_at(hi))
    }

    /// Distinct roots in `(lo, ∞)`.
    pub fn count_above(&self, lo: &Q) -> usize {
        self.variations_at(lo).saturating_sub(self.variations_at_infinity())
    }
}

/// A real algebraic number: exact rational or a root of a squarefree polynomial isolated in `(lo, hi)`.
#[derive(Clone, Debug)]
pub enum RealAlgebraic {
    Rational(Q),
    Root { poly: UniPoly, lo: Q, hi: Q },
}

const DEFAULT_WIDTH_EXP: u32 = 45;

fn two_pow(k: u32) -> Q {
    Q::from_integer(BigInt::from(2).pow(k))
}

impl RealAlgebraic {
    pub fn is_rational(&self) -> bool {
        matches!(self, RealAlgebraic::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            RealAlgebraic::Rational(r) => Some(r),
            RealAlgebraic::Root { .. } => None,
        }
    }

    pub fn bounds(&self) -> (Q, Q) {
        match self {
            RealAlgebraic::Rational(r) => (r.clone(), r.clone()),
            RealAlgebraic::Root { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealAlgebraic::Rational(r) => to_f64(r),
            RealAlgebraic::Root { lo, hi, .. } => to_f64(&((lo + hi) / Q::from_integer(BigInt::from(2)))),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RealAlgebraic::Rational(r) if r.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        match self {
            RealAlgebraic::Rational(r) => r.is_positive(),
            RealAlgebraic::Root { lo, .. } => !lo.is_negative(),
        }
    }

    /// Halves the isolating interval until its width is below `width`.
    pub fn refine(&mut self, width: &Q) {
        if let RealAlgebraic::Root { poly, lo, hi } = self {
            let two = Q::from_integer(BigInt::from(2));
            let lo_sign = poly.sign_at(lo);
            while &(hi.clone() - lo.clone()) >= width {
                let mid = (lo.clone() + hi.clone()) / &two;
                let s = poly.sign_at(&mid);
                if s == 0 {
                    *self = RealAlgebraic::Rational(mid);
                    return;
                }
                if s == lo_sign {
                    *lo = mid;
                } else {
                    *hi = mid;
                }
            }
        }
    }

    pub fn refined(&self, width: &Q) -> RealAlgebraic {
        let mut c = self.clone();
        c.refine(width);
        c
    }

    /// Whether `p` vanishes at this number (exact).
    pub fn is_root_of(&self, p: &UniPoly) -> bool {
        if p.is_zero() {
            return true;
        }
        match self {
            RealAlgebraic::Rational(r) => p.eval(r).is_zero(),
            RealAlgebraic::Root { poly, lo, hi } => {
                let g = UniPoly::gcd(poly, p);
                g.degree().unwrap_or(0) > 0 && Sturm::new(&g).count(lo, hi) > 0
            }
        }
    }

    pub fn exact_eq(&self, other: &RealAlgebraic) -> bool {
        match (self, other) {
            (RealAlgebraic::Rational(a), RealAlgebraic::Rational(b)) => a == b,
            (RealAlgebraic::Rational(r), root @ RealAlgebraic::Root { .. })
            | (root @ RealAlgebraic::Root { .. }, RealAlgebraic::Rational(r)) => {
                let (lo, hi) = root.bounds();
                let RealAlgebraic::Root { poly, .. } = root else { unreachable!() };
                &lo < r && r < &hi && poly.eval(r).is_zero()
            }
            (RealAlgebraic::Root { poly: pa, lo: la, hi: ha }, RealAlgebraic::Root { poly: pb, lo: lb, hi: hb }) => {
                let lo = if la > lb { la } else { lb };
                let hi = if ha < hb { ha } else { hb };
                if lo >= hi {
                    return false;
                }
                let g = UniPoly::gcd(pa, pb);
                // Endpoints are not roots of either polynomial, hence not of g.
                g.degree().unwrap_or(0) > 0 && Sturm::new(&g).count(lo, hi) > 0
            }
        }
    }

    pub fn cmp_exact(&self, other: &RealAlgebraic) -> Ordering {
        if self.exact_eq(other) {
            return Ordering::Equal;
        }
        let mut a = self.clone();
        let mut b = other.clone();
        let mut width = Q::one();
        loop {
            let (al, ah) = a.bounds();
            let (bl, bh) = b.bounds();
            if ah < bl || (ah == bl && (al != ah || bl != bh)) {
                return Ordering::Less;
            }
            if bh < al || (bh == al && (al != ah || bl != bh)) {
                return Ordering::Greater;
            }
            if a.is_rational() && b.is_rational() {
                return al.cmp(&bl);
            }
            width /= two_pow(8);
            a.refine(&width);
            b.refine(&width);
        }
    }

    /// Exact rational string, or an outward-rounded decimal interval.
    pub fn render(&self) -> String {
        match self {
            RealAlgebraic::Rational(r) => format_rational(r),
            RealAlgebraic::Root { lo, hi, .. } => {
                format!("[{}, {}]", decimal_floor(lo, 15), decimal_ceil(hi, 15))
            }
        }
    }

    pub fn defining_polynomial(&self) -> UniPoly {
        match self {
            RealAlgebraic::Rational(r) => UniPoly::linear_root(r),
            RealAlgebraic::Root { poly, .. } => poly.clone(),
        }
    }
}

impl fmt::Display for RealAlgebraic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn decimal(value: &Q, digits: usize, up: bool) -> String {
    let scale = Q::from_integer(BigInt::from(10).pow(digits as u32));
    let scaled = value * &scale;
    let int = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let negative = int.is_negative();
    let s = int.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits + 1);
    let (a, b) = s.split_at(s.len() - digits);
    let b = b.trim_end_matches('0');
    let body = if b.is_empty() { a.to_string() } else { format!("{a}.{b}") };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

pub fn decimal_floor(value: &Q, digits: usize) -> String {
    decimal(value, digits, false)
}

pub fn decimal_ceil(value: &Q, digits: usize) -> String {
    decimal(value, digits, true)
}

/// Nonnegative real roots of `p` (distinct, increasing).
pub fn nonneg_roots(p: &UniPoly) -> Vec<RealAlgebraic> {
    if p.is_zero() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let (stripped, zero_mult) = p.strip_zero_roots();
    if zero_mult > 0 {
        out.push(RealAlgebraic::Rational(Q::zero()));
    }
    out.extend(positive_roots(&stripped));
    out
}

/// Positive real roots of `p` (distinct, increasing).
pub fn positive_roots(p: &UniPoly) -> Vec<RealAlgebraic> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let sf = p.squarefree();
    let (sf, _) = sf.strip_zero_roots();
    if sf.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let sturm = Sturm::new(&sf);
    let bound = sf.root_bound();
    let mut roots = Vec::new();
    isolate(&sf, &sturm, Q::zero(), bound, &mut roots);
    let width = Q::new(BigInt::one(), BigInt::from(2).pow(DEFAULT_WIDTH_EXP));
    let mut out: Vec<RealAlgebraic> = roots
        .into_iter()
        .map(|mut r| {
            r.refine(&width);
            if let RealAlgebraic::Root { poly, lo, hi } = &r {
                let guess = simplest_between(lo, hi);
                if poly.eval(&guess).is_zero() {
                    return RealAlgebraic::Rational(guess);
                }
            }
            r
        })
        .collect();
    out.sort_by(|a, b| {
        let (al, _) = a.bounds();
        let (bl, _) = b.bounds();
        al.cmp(&bl)
    });
    out
}

fn isolate(sf: &UniPoly, sturm: &Sturm, lo: Q, hi: Q, out: &mut Vec<RealAlgebraic>) {
    let n = sturm.count(&lo, &hi);
    if n == 0 {
        return;
    }
    if n == 1 {
        if sf.eval(&hi).is_zero() {
            out.push(RealAlgebraic::Rational(hi));
        } else {
            out.push(RealAlgebraic::Root { poly: sf.clone(), lo, hi });
        }
        return;
    }
    let two = Q::from_integer(BigInt::from(2));
    let mid = (&lo + &hi) / &two;
    if sf.eval(&mid).is_zero() {
        let mut delta = (&hi - &lo) / Q::from_integer(BigInt::from(4));
        loop {
            let a = &mid - &delta;
            let b = &mid + &delta;
            if !sf.eval(&a).is_zero() && !sf.eval(&b).is_zero() && sturm.count(&a, &b) == 1 {
                out.push(RealAlgebraic::Rational(mid.clone()));
                isolate(sf, sturm, lo, a, out);
                isolate(sf, sturm, b, hi, out);
                return;
            }
            delta /= &two;
        }
    }
    isolate(sf, sturm, lo, mid.clone(), out);
    isolate(sf, sturm, mid, hi, out);
}
