//! Random small networks for property tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Complex, RateConstant, Reaction, ReactionNetwork};
use crate::rational::{q, q_frac};

fn species_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("A{i}")).collect()
}

/// Complexes of order one or two.
fn small_complexes(d: usize) -> Vec<Complex> {
    let mut out = Vec::new();
    for i in 0..d {
        let mut c = vec![0; d];
        c[i] = 1;
        out.push(Complex(c));
    }
    for i in 0..d {
        for j in i..d {
            let mut c = vec![0; d];
            c[i] += 1;
            c[j] += 1;
            out.push(Complex(c));
        }
    }
    out
}

fn random_rate<R: Rng>(rng: &mut R) -> RateConstant {
    RateConstant::Value(q_frac(rng.gen_range(1..=6), rng.gen_range(1..=3)))
}

fn build(d: usize, pairs: Vec<(Complex, Complex)>, all_used: bool, rng: &mut impl Rng) -> Option<ReactionNetwork> {
    let mut seen = std::collections::HashSet::new();
    let reactions: Vec<Reaction> = pairs
        .into_iter()
        .filter(|(a, b)| a != b && seen.insert((a.clone(), b.clone())))
        .map(|(reactant, product)| Reaction { reactant, product, rate_constant: random_rate(rng) })
        .collect();
    let used = (0..d).all(|s| reactions.iter().any(|r| r.reactant.0[s] + r.product.0[s] > 0));
    if reactions.is_empty() || (all_used && !used) {
        return None;
    }
    ReactionNetwork::new(species_names(d), reactions, BTreeMap::new()).ok()
}

/// Network with `d` species and up to `reactions` edges between complexes of order at most two,
/// some of them outflows; species may be unused.
pub fn random_network<R: Rng>(rng: &mut R, d: usize, reactions: usize) -> ReactionNetwork {
    let complexes = small_complexes(d);
    loop {
        let mut pairs = Vec::new();
        for _ in 0..reactions {
            let a = complexes.choose(rng).expect("nonempty").clone();
            let b = if rng.gen_bool(0.1) {
                Complex::zero(d)
            } else {
                complexes.choose(rng).expect("nonempty").clone()
            };
            pairs.push((a, b));
        }
        if let Some(net) = build(d, pairs, false, rng) {
            return net;
        }
    }
}

/// Network in which every reaction preserves a positive mass vector with entries in `{1, 2}`.
///
/// Returns the network and the mass vector.
pub fn random_conservative_network<R: Rng>(rng: &mut R, d: usize) -> (ReactionNetwork, Vec<u32>) {
    let mass: Vec<u32> = (0..d).map(|_| rng.gen_range(1..=2)).collect();
    let weight = |c: &Complex| c.0.iter().zip(&mass).map(|(a, m)| a * m).sum::<u32>();
    let mut by_mass: BTreeMap<u32, Vec<Complex>> = BTreeMap::new();
    for c in small_complexes(d) {
        by_mass.entry(weight(&c)).or_default().push(c);
    }
    let groups: Vec<Vec<Complex>> = by_mass.into_values().filter(|g| g.len() > 1).collect();
    loop {
        if groups.is_empty() {
            return random_conservative_network(rng, d);
        }
        let n = rng.gen_range(d..=d + 3);
        let mut pairs = Vec::new();
        for _ in 0..n {
            let g = groups.choose(rng).expect("nonempty");
            let mut two = g.choose_multiple(rng, 2);
            let a = two.next().expect("two").clone();
            let b = two.next().expect("two").clone();
            if rng.gen_bool(0.5) {
                pairs.push((b.clone(), a.clone()));
            }
            pairs.push((a, b));
        }
        if let Some(net) = build(d, pairs, true, rng) {
            return (net, mass);
        }
    }
}

/// Positive rational state with small numerators and denominators.
pub fn random_state<R: Rng>(rng: &mut R, d: usize) -> Vec<crate::rational::Q> {
    (0..d).map(|_| q(rng.gen_range(1..=20)) / q(rng.gen_range(1..=7))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conservation::LawSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conservative_networks_have_positive_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let d = rng.gen_range(2..=5);
            let (net, mass) = random_conservative_network(&mut rng, d);
            let laws = LawSet::of(&net);
            assert!(!laws.positive.is_empty());
            let s = net.stoichiometric_matrix();
            for r in 0..net.reactions().len() {
                let dot: i64 = (0..d).map(|i| mass[i] as i64 * s.get(i, r)).sum();
                assert_eq!(dot, 0);
            }
        }
    }
}
