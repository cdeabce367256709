//! Conservation laws: left kernel of the stoichiometric matrix and its nonnegative extreme rays.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::linalg::{rank_of_rows, QMatrix};
use crate::model::{ReactionNetwork, StoichiometricMatrix};
use crate::rational::{format_rational, gcd_of_numerators, lcm_of_denominators, to_f64, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConservationLaw {
    pub coeffs: Vec<Q>,
    pub support: Vec<usize>,
    pub positive: bool,
}

impl ConservationLaw {
    pub fn new(coeffs: Vec<Q>) -> Self {
        let support: Vec<usize> = (0..coeffs.len()).filter(|&i| !coeffs[i].is_zero()).collect();
        let positive = !support.is_empty() && coeffs.iter().all(|c| !c.is_negative());
        ConservationLaw { coeffs, support, positive }
    }

    pub fn contains(&self, species: usize) -> bool {
        !self.coeffs[species].is_zero()
    }

    /// Linear expression such as `X + 2 Y - Z`.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for &s in &self.support {
            let c = &self.coeffs[s];
            let mag = c.abs();
            let term = if mag.is_one() { names[s].clone() } else { format!("{} {}", format_rational(&mag), names[s]) };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
                out.push_str(&term);
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
                out.push_str(&term);
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }

    pub fn dot(&self, x: &[Q]) -> Q {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn dot_f64(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| to_f64(c) * v).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConservedTotals {
    #[serde(serialize_with = "serialize_rationals")]
    pub values: Vec<Q>,
}

fn serialize_rationals<S: serde::Serializer>(values: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(format_rational))
}

impl ConservedTotals {
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(to_f64).collect()
    }
}

pub fn totals(laws: &[ConservationLaw], x0: &[Q]) -> ConservedTotals {
    ConservedTotals { values: laws.iter().map(|l| l.dot(x0)).collect() }
}

fn primitive_integer(v: &[Q]) -> Vec<Q> {
    let lcm = lcm_of_denominators(v);
    let scaled: Vec<Q> = v.iter().map(|c| c * Q::from_integer(lcm.clone())).collect();
    let g = gcd_of_numerators(&scaled);
    if g.is_zero() {
        return scaled;
    }
    let mut out: Vec<Q> = scaled.iter().map(|c| c / Q::from_integer(g.clone())).collect();
    if out.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
        out.iter_mut().for_each(|c| *c = -c.clone());
    }
    out
}

/// Basis of `{c : cᵀ S = 0}` as primitive integer vectors.
pub fn kernel_basis(s: &StoichiometricMatrix) -> Vec<ConservationLaw> {
    let t = if s.cols == 0 { QMatrix::zeros(0, s.rows) } else { s.to_rational().transpose() };
    t.nullspace().iter().map(|v| ConservationLaw::new(primitive_integer(v))).collect()
}

fn normalize_ray(c: &[Q]) -> Vec<Q> {
    let min = c.iter().filter(|v| v.is_positive()).min().cloned().expect("nonzero ray");
    c.iter().map(|v| v / &min).collect()
}

/// Extreme rays of `span(basis) ∩ R^d_{≥0}`, smallest nonzero coefficient scaled to 1.
pub fn positive_laws(basis: &[ConservationLaw]) -> Vec<ConservationLaw> {
    let k = basis.len();
    if k == 0 {
        return Vec::new();
    }
    let d = basis[0].coeffs.len();
    // Rows of the constraint matrix: species s gives (basis_1[s], ..., basis_k[s]).
    let rows: Vec<Vec<Q>> = (0..d).map(|s| basis.iter().map(|b| b.coeffs[s].clone()).collect()).collect();
    let mut chosen: Vec<usize> = Vec::new();
    for s in 0..d {
        let mut trial: Vec<Vec<Q>> = chosen.iter().map(|&i| rows[i].clone()).collect();
        trial.push(rows[s].clone());
        if rank_of_rows(&trial) == trial.len() {
            chosen.push(s);
            if chosen.len() == k {
                break;
            }
        }
    }
    if chosen.len() < k {
        return Vec::new();
    }
    let a_k = QMatrix::from_rows(&chosen.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>());
    let to_c = |y: &[Q]| -> Vec<Q> {
        (0..d).map(|s| rows[s].iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    };
    let mut rays: Vec<Vec<Q>> = (0..k)
        .map(|t| {
            let mut e = vec![Q::zero(); k];
            e[t] = Q::one();
            to_c(&a_k.solve(&e).expect("independent rows"))
        })
        .collect();
    let mut processed: Vec<usize> = chosen.clone();
    for s in (0..d).filter(|s| !chosen.contains(s)) {
        let (mut pos, mut zero, mut neg) = (Vec::new(), Vec::new(), Vec::new());
        for r in rays.drain(..) {
            if r[s].is_positive() {
                pos.push(r);
            } else if r[s].is_negative() {
                neg.push(r);
            } else {
                zero.push(r);
            }
        }
        let zero_set = |r: &Vec<Q>| -> BTreeSet<usize> { processed.iter().copied().filter(|&i| r[i].is_zero()).collect() };
        let all: Vec<&Vec<Q>> = pos.iter().chain(zero.iter()).chain(neg.iter()).collect();
        let zero_sets: Vec<BTreeSet<usize>> = all.iter().map(|r| zero_set(r)).collect();
        let mut created = Vec::new();
        for (pi, p) in pos.iter().enumerate() {
            for (ni, n) in neg.iter().enumerate() {
                let p_idx = pi;
                let n_idx = pos.len() + zero.len() + ni;
                let common: BTreeSet<usize> = zero_sets[p_idx].intersection(&zero_sets[n_idx]).copied().collect();
                if common.len() + 2 < k {
                    continue;
                }
                let adjacent = (0..all.len())
                    .filter(|&o| o != p_idx && o != n_idx)
                    .all(|o| !common.is_subset(&zero_sets[o]));
                if !adjacent {
                    continue;
                }
                let ps = p[s].clone();
                let ns = -n[s].clone();
                let combo: Vec<Q> = p.iter().zip(n).map(|(a, b)| &ps * b + &ns * a).collect();
                created.push(combo);
            }
        }
        rays.extend(pos);
        rays.extend(zero);
        rays.extend(created);
        processed.push(s);
    }
    let mut normalized: Vec<Vec<Q>> = rays
        .iter()
        .filter(|r| r.iter().any(|v| !v.is_zero()))
        .map(|r| normalize_ray(r))
        .collect();
    normalized.sort_by(|a, b| law_order(a, b));
    normalized.dedup();
    normalized.into_iter().map(ConservationLaw::new).collect()
}

/// Laws whose support starts earlier come first; then larger leading coefficients.
fn law_order(a: &[Q], b: &[Q]) -> std::cmp::Ordering {
    let first = |v: &[Q]| v.iter().position(|c| !c.is_zero()).unwrap_or(v.len());
    first(a).cmp(&first(b)).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            let o = y.cmp(x);
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    })
}

/// Conservation data of a network.
#[derive(Clone, Debug)]
pub struct LawSet {
    pub basis: Vec<ConservationLaw>,
    pub positive: Vec<ConservationLaw>,
    /// Independent laws spanning the kernel: positive laws first, completed from the basis.
    pub working: Vec<ConservationLaw>,
}

impl LawSet {
    pub fn of(net: &ReactionNetwork) -> Self {
        let basis = kernel_basis(&net.stoichiometric_matrix());
        let positive = positive_laws(&basis);
        let mut working: Vec<ConservationLaw> = Vec::new();
        for law in positive.iter().chain(basis.iter()) {
            let mut rows: Vec<Vec<Q>> = working.iter().map(|l| l.coeffs.clone()).collect();
            rows.push(law.coeffs.clone());
            if rank_of_rows(&rows) == rows.len() {
                working.push(law.clone());
            }
            if working.len() == basis.len() {
                break;
            }
        }
        LawSet { basis, positive, working }
    }

    /// Whether some positive law contains `species` but not `input`.
    pub fn bounds_species_against(&self, input: usize, species: usize) -> bool {
        self.positive.iter().any(|l| l.contains(species) && !l.contains(input))
    }
}

pub fn integer_coeffs(law: &ConservationLaw) -> Vec<BigInt> {
    primitive_integer(&law.coeffs).iter().map(|c| c.to_integer()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::parser::parse_str;
    use crate::rational::q;

    fn ints(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn archetypal_single_law() {
        let net = parse_str("X + Y -> 2 Y ; 2\nY -> X ; 1").unwrap();
        let basis = kernel_basis(&net.stoichiometric_matrix());
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].coeffs, ints(&[1, 1]));
        assert_eq!(totals(&basis, &ints(&[3, 2])).values, vec![q(5)]);
    }

    #[test]
    fn envz_positive_laws() {
        let net = fixtures::envz_ompr();
        let basis = kernel_basis(&net.stoichiometric_matrix());
        assert_eq!(basis.len(), 2);
        let pos = positive_laws(&basis);
        assert_eq!(pos.len(), 2);
        assert_eq!(pos[0].coeffs, ints(&[1, 1, 1, 0, 0, 1, 1]));
        assert_eq!(pos[1].coeffs, ints(&[0, 0, 0, 1, 1, 1, 1]));
        let t = totals(&pos, &ints(&[1; 7]));
        assert_eq!(t.values, vec![q(5), q(4)]);
    }

    #[test]
    fn futile_positive_laws() {
        let net = fixtures::futile_cycle();
        let pos = positive_laws(&kernel_basis(&net.stoichiometric_matrix()));
        let supports: Vec<Vec<usize>> = pos.iter().map(|l| l.support.clone()).collect();
        assert_eq!(supports, vec![vec![0, 1, 4, 5], vec![2, 4], vec![3, 5]]);
    }

    #[test]
    fn no_positive_law() {
        let basis = vec![ConservationLaw::new(ints(&[1, -1]))];
        assert!(positive_laws(&basis).is_empty());
    }

    #[test]
    fn rescaled_basis_gives_same_rays() {
        let net = fixtures::futile_cycle();
        let basis = kernel_basis(&net.stoichiometric_matrix());
        let mixed: Vec<ConservationLaw> = vec![
            ConservationLaw::new(basis[0].coeffs.iter().zip(&basis[1].coeffs).map(|(a, b)| a * q(3) - b).collect()),
            ConservationLaw::new(basis[1].coeffs.iter().map(|a| a * q(-7)).collect()),
            ConservationLaw::new(basis[2].coeffs.iter().zip(&basis[0].coeffs).map(|(a, b)| a + b * q(2)).collect()),
        ];
        assert_eq!(positive_laws(&basis), positive_laws(&mixed));
    }

    #[test]
    fn render_law() {
        let l = ConservationLaw::new(vec![q(1), q(-2), q(0)]);
        assert_eq!(l.render(&["A".into(), "B".into(), "C".into()]), "A - 2 B");
    }
}
