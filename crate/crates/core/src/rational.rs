//! Exact rational helpers shared across modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `3`, `-2`, `3/2`, `0.125`, `1e-3`, `2.5E4` exactly.
pub fn parse_rational(text: &str) -> Option<Q> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = parse_int(num.trim())?;
        let d: BigInt = parse_int(den.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().ok()?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    if exponent.abs() > 4000 {
        return None;
    }
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Q::from_integer(all_digits.parse::<BigInt>().ok()?);
    let shift = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if shift >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    if negative {
        value = -value;
    }
    Some(value)
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn format_rational(value: &Q) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Q) -> f64 {
    if let Some(v) = value.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = value.numer().to_f64().unwrap_or(f64::NAN);
    let d = value.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact conversion of a finite float.
pub fn from_f64(value: f64) -> Option<Q> {
    Q::from_float(value)
}

/// Simplest rational (smallest denominator) in the closed interval `[lo, hi]`.
pub fn simplest_between(lo: &Q, hi: &Q) -> Q {
    debug_assert!(lo <= hi);
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Q::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi.clone(), &-lo.clone());
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if fl.clone() + Q::one() <= *hi {
        return fl + Q::one();
    }
    let inner = simplest_between(&(hi.clone() - &fl).recip(), &(lo.clone() - &fl).recip());
    fl + inner.recip()
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn gcd_of_numerators<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values.into_iter().fold(BigInt::zero(), |acc, v| acc.gcd(v.numer()))
}
