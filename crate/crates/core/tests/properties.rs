use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crnrob_core::conservation::LawSet;
use crnrob_core::model::{Complex, ReactionNetwork};
use crnrob_core::numeric::{sweep_states, SolverContext, SolverOptions};
use crnrob_core::parser::{parse_bytes, parse_str, serialize};
use crnrob_core::random::{random_conservative_network, random_network, random_state};
use crnrob_core::rational::{q, to_f64, Q};
use crnrob_core::symbolic::univariate::{nonneg_roots, UniPoly};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn any_network(seed: u64) -> (ReactionNetwork, ChaCha8Rng) {
    let mut r = rng(seed);
    let d = r.gen_range(1..=6);
    let n = r.gen_range(1..=8);
    (random_network(&mut r, d, n), r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn laws_annihilate_rhs_exactly(seed in any::<u64>()) {
        let (net, mut r) = any_network(seed);
        let x = random_state(&mut r, net.species_count());
        let rhs = net.mass_action_rhs_exact(&x).unwrap();
        let s = net.stoichiometric_matrix();
        for law in &LawSet::of(&net).basis {
            let dot: Q = law.coeffs.iter().zip(&rhs).map(|(c, f)| c * f).sum();
            prop_assert_eq!(dot, q(0));
            for col in 0..s.cols {
                let v: Q = law.coeffs.iter().zip(s.column(col)).map(|(c, e)| c * q(e)).sum();
                prop_assert_eq!(v, q(0));
            }
        }
    }

    #[test]
    fn float_rhs_matches_exact(seed in any::<u64>()) {
        let (net, mut r) = any_network(seed);
        let x = random_state(&mut r, net.species_count());
        let exact = net.mass_action_rhs_exact(&x).unwrap();
        let xf: Vec<f64> = x.iter().map(to_f64).collect();
        let float = net.mass_action_rhs(&xf).unwrap();
        let scale = exact.iter().map(|v| to_f64(v).abs()).fold(1.0, f64::max);
        for (a, b) in float.iter().zip(&exact) {
            prop_assert!((a - to_f64(b)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn jacobian_matches_central_differences(seed in any::<u64>()) {
        let (net, mut r) = any_network(seed);
        let d = net.species_count();
        let x: Vec<f64> = (0..d).map(|_| r.gen_range(0.1..5.0)).collect();
        let jac = net.mass_action_jacobian(&x).unwrap();
        let norm = jac.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for k in 0..d {
            let h = 1e-6 * x[k].max(1.0);
            let (mut up, mut down) = (x.clone(), x.clone());
            up[k] += h;
            down[k] -= h;
            let fu = net.mass_action_rhs(&up).unwrap();
            let fd = net.mass_action_rhs(&down).unwrap();
            for i in 0..d {
                let diff = (fu[i] - fd[i]) / (2.0 * h);
                prop_assert!((diff - jac[(i, k)]).abs() <= 1e-6 * norm);
            }
        }
    }

    #[test]
    fn serialize_round_trips(seed in any::<u64>()) {
        let (net, _) = any_network(seed);
        let again = parse_str(&serialize(&net)).unwrap();
        prop_assert_eq!(again, net);
    }

    #[test]
    fn trajectories_keep_positive_totals(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=5);
        let (net, _) = random_conservative_network(&mut r, d);
        let x0: Vec<f64> = random_state(&mut r, d).iter().map(to_f64).collect();
        let ctx = SolverContext::new(&net);
        let times = [0.01, 0.1, 1.0, 10.0, 100.0];
        let path = ctx.trajectory(&x0, &times, &SolverOptions::default());
        for law in &ctx.laws.positive {
            let start = law.dot_f64(&x0);
            for x in &path {
                prop_assert!((law.dot_f64(x) - start).abs() < 1e-8 * start);
            }
        }
    }

    #[test]
    fn converged_states_meet_tolerances(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=5);
        let (net, _) = random_conservative_network(&mut r, d);
        let x0: Vec<f64> = random_state(&mut r, d).iter().map(to_f64).collect();
        let ctx = SolverContext::new(&net);
        let opts = SolverOptions::default();
        let ss = ctx.solve(&x0, &opts);
        if ss.converged {
            prop_assert!(ss.scaled_residual < opts.final_tol);
            prop_assert!(ss.x.iter().all(|v| *v >= 0.0));
            for (a, b) in ctx.totals_f64(&ss.x).iter().zip(ctx.totals_f64(&x0)) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn parallel_sweep_is_bit_identical(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = r.gen_range(2..=4);
        let (net, _) = random_conservative_network(&mut r, d);
        let x0: Vec<f64> = random_state(&mut r, d).iter().map(to_f64).collect();
        let ctx = SolverContext::new(&net);
        let opts = SolverOptions::default();
        let lambdas = [0.5, 2.0, 10.0, 100.0];
        let input = r.gen_range(0..d);
        let parallel = sweep_states(&ctx, &x0, input, &lambdas, &opts);
        for (k, &l) in lambdas.iter().enumerate() {
            let mut shifted = x0.clone();
            shifted[input] += l;
            let serial = ctx.solve(&shifted, &opts);
            prop_assert_eq!(&serial.x, &parallel[k].x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5000))]

    #[test]
    fn parser_survives_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_bytes(&bytes, "fuzz");
    }

    #[test]
    fn parser_survives_crn_like_text(text in "[A-Za-z0-9 +<>=;,:#./\\-\n]{0,200}") {
        let _ = parse_str(&text);
    }
}

fn complex_text(names: &[&str], c: &Complex) -> String {
    let parts: Vec<String> = c
        .0
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { names[i].to_string() } else { format!("{k} {}", names[i]) })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reversible_arrow_equals_two_lines(
        a in proptest::collection::vec(0u32..3, 3),
        b in proptest::collection::vec(0u32..3, 3),
        kf in 1i64..9,
        kr in 1i64..9,
    ) {
        prop_assume!(a != b);
        let names = ["A", "B", "C"];
        let (lhs, rhs) = (complex_text(&names, &Complex(a)), complex_text(&names, &Complex(b)));
        let joint = format!("species: A, B, C\n{lhs} <-> {rhs} ; {kf}, {kr}\n");
        let split = format!("species: A, B, C\n{lhs} -> {rhs} ; {kf}\n{rhs} -> {lhs} ; {kr}\n");
        prop_assert_eq!(parse_str(&joint).unwrap(), parse_str(&split).unwrap());
    }
}

/// `(x^2 + k) * Π (x - r)^m` with known real roots.
fn poly_with_roots(roots: &[(Q, u32)], k: i64) -> UniPoly {
    let mut p = UniPoly::new(vec![q(k), q(0), q(1)]);
    for (r, m) in roots {
        for _ in 0..*m {
            p = p.mul(&UniPoly::linear_root(r));
        }
    }
    p
}

fn companion_real_roots(p: &UniPoly) -> Vec<f64> {
    let sf = p.squarefree().monic();
    let n = sf.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -to_f64(&sf.coeff(i));
    }
    m.complex_eigenvalues().iter().filter(|z| z.im.abs() < 1e-6).map(|z| z.re).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sturm_isolation_agrees_with_companion_eigenvalues(
        raw in proptest::collection::btree_set(-15i64..15, 0..5),
        dens in proptest::collection::vec(1i64..4, 5),
        mult in proptest::collection::vec(1u32..3, 5),
        k in 1i64..6,
    ) {
        let mut roots: Vec<(Q, u32)> = Vec::new();
        for (i, n) in raw.iter().enumerate() {
            let r = q(*n) / q(dens[i]);
            if roots.iter().all(|(s, _)| *s != r) {
                roots.push((r, mult[i]));
            }
        }
        let p = poly_with_roots(&roots, k);
        let mut expected: Vec<Q> = roots.iter().map(|(r, _)| r.clone()).filter(|r| *r >= q(0)).collect();
        expected.sort();
        let found = nonneg_roots(&p);
        prop_assert_eq!(found.len(), expected.len());
        for (f, e) in found.iter().zip(&expected) {
            prop_assert!(f.is_root_of(&UniPoly::linear_root(e)));
        }
        let mut numeric: Vec<f64> = companion_real_roots(&p).into_iter().filter(|v| *v >= -1e-9).collect();
        numeric.sort_by(f64::total_cmp);
        prop_assert_eq!(numeric.len(), expected.len());
        for (n, e) in numeric.iter().zip(&expected) {
            prop_assert!((n - to_f64(e)).abs() < 1e-6);
        }
    }
}
