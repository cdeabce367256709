//! Acceptance suite: one PASS/FAIL line per criterion.

// `ensure!(a <= b)` fails on NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crnrob_core::classifier::{
    analyze_network, build_table, classify_pair, guarantee_report, CellKind, Classification, ClassificationTable,
    ClassifierOptions, NetworkAnalysis, Provenance,
};
use crnrob_core::conservation::LawSet;
use crnrob_core::fixtures;
use crnrob_core::model::{uniform_state, ReactionNetwork};
use crnrob_core::numeric::{find_steady_state, shifted, SolverOptions};
use crnrob_core::parser::{parse_bytes, parse_str};
use crnrob_core::random::{random_conservative_network, random_network, random_state};
use crnrob_core::rational::{q, to_f64, Q};
use crnrob_core::symbolic::univariate::{RealAlgebraic, UniPoly};
use crnrob_core::symbolic::LimitValue;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

fn param(net: &ReactionNetwork, name: &str) -> Q {
    net.parameters().get(name).cloned().unwrap_or_else(|| panic!("parameter {name}"))
}

fn state(net: &ReactionNetwork, spec: &str) -> Vec<Q> {
    net.parse_state(spec).expect("valid state")
}

fn f64s(x: &[Q]) -> Vec<f64> {
    x.iter().map(to_f64).collect()
}

fn idx(net: &ReactionNetwork, name: &str) -> usize {
    net.species_index(name).unwrap_or_else(|| panic!("species {name}"))
}

fn exact_limit(c: &Classification) -> Option<Q> {
    match c.limit.as_ref()?.exact()? {
        LimitValue::Finite(r) => r.as_rational().cloned(),
        LimitValue::Zero => Some(q(0)),
        LimitValue::Infinity => None,
    }
}

fn label(c: &Classification) -> &'static str {
    c.kind.short()
}

fn compare_pattern(table: &ClassificationTable, expected: &[[&str; 7]]) -> Result<(), String> {
    compare_rows(table, &expected.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn compare_rows(table: &ClassificationTable, expected: &[Vec<&str>]) -> Result<(), String> {
    let mut bad = Vec::new();
    for (i, row) in expected.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            let got = label(&table.cells[i][j]);
            if got != *want {
                bad.push(format!("{}->{}: {got} (expected {want})", table.species[i], table.species[j]));
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad.join(", "))
    }
}

fn all_certified(table: &ClassificationTable) -> Result<(), String> {
    for (i, row) in table.cells.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if c.provenance == Provenance::NumericInferred || c.kind == CellKind::Undetermined {
                return Err(format!(
                    "{}->{} is {:?} with provenance {:?}",
                    table.species[i], table.species[j], c.kind, c.provenance
                ));
            }
        }
    }
    Ok(())
}

// Archetypal network: branches and the certified ACR value.
fn criterion_1() -> Check {
    let net = fixtures::archetypal();
    let (alpha, beta) = (to_f64(&param(&net, "alpha")), to_f64(&param(&net, "beta")));
    ensure!(alpha == 2.0 && beta == 1.0, "fixture constants alpha={alpha}, beta={beta}");
    let threshold = beta / alpha;
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for &total in &[0.05, 0.1, 0.3, 0.45, 0.6, 1.0, 2.0, 5.0, 10.0, 100.0, 1e4] {
        for &split in &[0.2, 0.5, 0.9] {
            let x0 = [total * split, total * (1.0 - split)];
            let ss = find_steady_state(&net, &x0, &opts);
            ensure!(ss.converged, "no convergence at T={total}");
            let (want_x, want_y) = if total >= threshold { (threshold, total - threshold) } else { (total, 0.0) };
            let err = (ss.x[0] - want_x).abs().max((ss.x[1] - want_y).abs());
            ensure!(err < 1e-6, "T={total}: got ({}, {}), expected ({want_x}, {want_y})", ss.x[0], ss.x[1]);
            worst = worst.max(err);
        }
    }
    let x0 = uniform_state(2, 1);
    let cls = ClassifierOptions::default();
    for input in 0..2 {
        let c = classify_pair(&net, &x0, input, 0, &cls);
        ensure!(c.kind == CellKind::Acr, "input {input}: X is {:?}", c.kind);
        let expected = param(&net, "beta") / param(&net, "alpha");
        ensure!(exact_limit(&c) == Some(expected.clone()), "input {input}: limit {:?}", c.limit);
    }
    Ok(format!("branch error {worst:.1e}; X is ACR with limit 1/2"))
}

fn archetypal_mod_closed_form(alpha: f64, beta: f64, gamma: f64, total: f64) -> f64 {
    let disc = ((alpha * total - beta + gamma).powi(2) + 4.0 * beta * gamma).sqrt();
    (beta + gamma + alpha * total - disc) / (2.0 * alpha)
}

// Modified archetypal network: closed form, q and the aACR limit.
fn criterion_2() -> Check {
    let net = fixtures::archetypal_mod();
    let alpha = to_f64(&param(&net, "alpha"));
    let beta = to_f64(&param(&net, "beta"));
    let gamma = to_f64(&param(&net, "gamma"));
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    let n = 36;
    for k in 0..n {
        let total = 0.1 * 10f64.powf(7.0 * k as f64 / (n - 1) as f64);
        let ss = find_steady_state(&net, &[total / 2.0, total / 2.0], &opts);
        ensure!(ss.converged, "no convergence at T={total}");
        let want = archetypal_mod_closed_form(alpha, beta, gamma, total);
        let err = (ss.x[0] - want).abs();
        ensure!(err < 1e-6, "T={total}: X={} but closed form {want}", ss.x[0]);
        worst = worst.max(err);
    }
    let at_100 = find_steady_state(&net, &[50.0, 50.0], &opts).x[0];
    ensure!((at_100 - 0.990001).abs() < 1e-6, "X at T=100 is {at_100}");

    let x0 = net.parse_state("X=1,Y=1").expect("state");
    let analysis = analyze_network(&net, &x0, &ClassifierOptions::default());
    let expected_q = UniPoly::new(vec![param(&net, "beta"), -param(&net, "alpha")]);
    let expected_limit = param(&net, "beta") / param(&net, "alpha");
    for row in &analysis.rows {
        let elim = row.symbolic.elims[0].as_ref().map_err(|e| format!("elimination failed: {e}"))?;
        let scaled = elim.q.scale(&(expected_q.leading() / elim.q.leading()));
        ensure!(scaled == expected_q, "q = {} for input {}", elim.q, row.input);
        let c = &row.cells[0];
        ensure!(c.kind == CellKind::Aacr, "input {}: X is {:?}", row.input, c.kind);
        ensure!(exact_limit(c) == Some(expected_limit.clone()), "input {}: limit {:?}", row.input, c.limit);
    }
    Ok(format!("closed-form error {worst:.1e}; X(T=100)={at_100:.6}; q = {}; aACR limit 1", expected_q.render("x")))
}

struct EnvzConstants {
    a: Q,
    b: Q,
    c: Q,
    d: Q,
}

fn envz_constants(net: &ReactionNetwork) -> EnvzConstants {
    let k = |n: &str| param(net, n);
    let a = q(1) + k("k4") / k("k2") + k("k4") / k("k6") + (k("km1") + k("k2")) * k("k4") / (k("k1") * k("k2"));
    let b = (k("km3") + k("k4")) / k("k3");
    let c = k("k2") * (k("km5") + k("k6")) / (k("k5") * k("k6"));
    let d = q(1) + k("k4") / k("k6");
    EnvzConstants { a, b, c, d }
}

const ENVZ_TABLE: [[&str; 7]; 7] = [
    ["aACR", "aACR", "inf", "0", "ACR", "aACR", "aACR"],
    ["aACR", "aACR", "inf", "0", "ACR", "aACR", "aACR"],
    ["aACR", "aACR", "inf", "0", "ACR", "aACR", "aACR"],
    ["aACR", "aACR", "0", "inf", "ACR", "aACR", "aACR"],
    ["aACR", "aACR", "0", "inf", "ACR", "aACR", "aACR"],
    ["inf", "inf", "aACR", "inf", "ACR", "inf", "inf"],
    ["inf", "inf", "aACR", "inf", "ACR", "inf", "inf"],
];

const ENVZ_MOD_TABLE: [[&str; 7]; 7] = [
    ["inf", "inf", "inf", "0", "0", "aACR", "aACR"],
    ["inf", "inf", "inf", "0", "0", "aACR", "aACR"],
    ["inf", "inf", "inf", "0", "0", "aACR", "aACR"],
    ["aACR", "aACR", "0", "inf", "aACR", "aACR", "aACR"],
    ["aACR", "aACR", "0", "inf", "aACR", "aACR", "aACR"],
    ["inf", "inf", "aACR", "inf", "aACR", "inf", "inf"],
    ["inf", "inf", "aACR", "inf", "aACR", "inf", "inf"],
];

const X_SIDE: [&str; 3] = ["X", "XT", "XP"];
const Y_SIDE: [&str; 2] = ["Y", "YP"];
const COMPLEXES: [&str; 2] = ["XPY", "XTYP"];

fn tail_value(net: &ReactionNetwork, x0: &[Q], input: usize, output: usize, lambda: f64) -> Result<f64, String> {
    let ss = find_steady_state(net, &shifted(&f64s(x0), input, lambda), &SolverOptions::default());
    ensure!(ss.converged, "no convergence at lambda={lambda}");
    Ok(ss.x[output])
}

// EnvZ-OmpR: ACR value, table pattern and closed-form limits.
fn criterion_3() -> Check {
    let net = fixtures::envz_ompr();
    let k = envz_constants(&net);
    let yp = idx(&net, "YP");
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for (species, values) in [("X", [0.2, 1.0, 3.0, 10.0, 50.0]), ("Y", [0.5, 1.0, 4.0, 20.0, 100.0])] {
        for v in values {
            let mut x0 = vec![1.0; 7];
            x0[idx(&net, species)] = v;
            let ss = find_steady_state(&net, &x0, &opts);
            ensure!(ss.converged, "no convergence at {species}(0)={v}");
            let err = (ss.x[yp] - to_f64(&k.c)).abs();
            ensure!(err < 1e-8, "{species}(0)={v}: YP={}", ss.x[yp]);
            worst = worst.max(err);
        }
    }

    let cls = ClassifierOptions::default();
    let x0 = uniform_state(7, 1);
    let table = build_table(&net, &x0, &cls);
    compare_pattern(&table, &ENVZ_TABLE).map_err(|e| format!("table mismatch: {e}"))?;
    all_certified(&table)?;

    let (xpy, xp) = (idx(&net, "XPY"), idx(&net, "XP"));
    let mut checked = 0;
    for spec in ["all=1", "all=1,X=2,Y=3", "all=1,XT=4,YP=1/2"] {
        let x0 = state(&net, spec);
        let t1: Q = ["X", "XT", "XP", "XPY", "XTYP"].iter().map(|s| x0[idx(&net, s)].clone()).sum();
        let t2: Q = ["Y", "YP", "XPY", "XTYP"].iter().map(|s| x0[idx(&net, s)].clone()).sum();
        let table = if spec == "all=1" { table.clone() } else { build_table(&net, &x0, &cls) };
        let mut expect = |inputs: &[&str], output: usize, value: Q| -> Result<(), String> {
            for name in inputs {
                let i = idx(&net, name);
                let cell = &table.cells[i][output];
                ensure!(
                    exact_limit(cell) == Some(value.clone()),
                    "{spec}: {name}->{}: {:?}, expected {value}",
                    table.species[output],
                    cell.limit
                );
                let tail = tail_value(&net, &x0, i, output, 1e4)?;
                let want = to_f64(&value);
                ensure!((tail - want).abs() <= 0.01 * want, "{spec}: {name}->{} tail {tail} vs {want}", table.species[output]);
                checked += 1;
            }
            Ok(())
        };
        expect(&X_SIDE, xpy, (t2.clone() - k.c.clone()) / k.d.clone())?;
        expect(&Y_SIDE, xpy, t1.clone() / k.a.clone())?;
        expect(&COMPLEXES, xp, k.b.clone() / (k.a.clone() - k.d.clone()))?;
    }
    Ok(format!("YP deviation {worst:.1e}; classification pattern matches; {checked} closed-form limits and tails agree"))
}

// Modified EnvZ-OmpR: expected pattern and the inherited YP limit.
fn criterion_4() -> Check {
    let net = fixtures::envz_ompr_mod();
    ensure!(net.reactions().len() == fixtures::envz_ompr().reactions().len() + 1, "expected one added reaction");
    let c = envz_constants(&fixtures::envz_ompr()).c;
    let cls = ClassifierOptions::default();
    let table = build_table(&net, &uniform_state(7, 1), &cls);
    compare_pattern(&table, &ENVZ_MOD_TABLE).map_err(|e| format!("table mismatch: {e}"))?;
    all_certified(&table)?;
    let yp = idx(&net, "YP");
    for name in Y_SIDE.iter().chain(&COMPLEXES) {
        let cell = &table.cells[idx(&net, name)][yp];
        ensure!(exact_limit(cell) == Some(c.clone()), "{name}->YP limit {:?}, expected {c}", cell.limit);
    }
    Ok("classification pattern matches; YP limit is exactly 2 for Y-side and complex inputs".into())
}

const FUTILE_TABLE: [[&str; 6]; 6] = [
    ["inf", "inf", "0", "0", "aACR", "aACR"],
    ["inf", "inf", "0", "0", "aACR", "aACR"],
    ["0", "aACR", "inf", "aACR", "aACR", "aACR"],
    ["aACR", "0", "aACR", "inf", "aACR", "aACR"],
    ["0", "inf", "inf", "0", "aACR", "aACR"],
    ["inf", "0", "0", "inf", "aACR", "aACR"],
];

const FUTILE_MOD_TABLE: [[&str; 6]; 6] = [
    ["inf", "inf", "0", "0", "aACR", "aACR"],
    ["inf", "inf", "0", "0", "aACR", "aACR"],
    ["0", "0", "inf", "aACR", "aACR", "0"],
    ["0", "0", "aACR", "inf", "0", "aACR"],
    ["inf", "inf", "inf", "0", "inf", "aACR"],
    ["inf", "inf", "0", "inf", "aACR", "inf"],
];

fn rows6(t: &[[&'static str; 6]; 6]) -> Vec<Vec<&'static str>> {
    t.iter().map(|r| r.to_vec()).collect()
}

// Futile cycle: SE limit, the three regimes and both futile-cycle tables.
fn criterion_5() -> Check {
    let net = fixtures::futile_cycle();
    let k = |n: &str| param(&net, n);
    let c = k("k2") / k("k4");
    let a = k("k1") / (k("km1") + k("k2"));
    let b = k("k3") / (k("km3") + k("k4"));
    let cls = ClassifierOptions::default();
    let (s, p, e, f, se, pf) = (idx(&net, "S"), idx(&net, "P"), idx(&net, "E"), idx(&net, "F"), idx(&net, "SE"), idx(&net, "PF"));
    let mut regimes = Vec::new();
    for spec in ["all=1", "all=1,F=2", "all=1,E=2", "all=1,E=3,F=5/2", "all=1,F=7,PF=1/2"] {
        let x0 = state(&net, spec);
        let t2 = x0[e].clone() + x0[se].clone();
        let t3 = x0[f].clone() + x0[pf].clone();
        let cap = t3.clone() / c.clone();
        let table = build_table(&net, &x0, &cls);
        all_certified(&table).map_err(|m| format!("{spec}: {m}"))?;
        let se_limit = if t2 < cap { t2.clone() } else { cap.clone() };
        for input in [s, p] {
            let cell = &table.cells[input][se];
            ensure!(exact_limit(cell) == Some(se_limit.clone()), "{spec}: SE limit {:?}, expected {se_limit}", cell.limit);
            let row: Vec<&str> = [s, p, e, f, pf].iter().map(|&j| label(&table.cells[input][j])).collect();
            let expected: [&str; 5];
            let name;
            if t2 < cap {
                name = "i";
                expected = ["inf", "aACR", "0", "aACR", "aACR"];
                let ct2 = c.clone() * t2.clone();
                ensure!(exact_limit(&table.cells[input][p]) == Some(ct2.clone() / (b.clone() * (t3.clone() - ct2.clone()))), "{spec}: P limit {:?}", table.cells[input][p].limit);
                ensure!(exact_limit(&table.cells[input][f]) == Some(t3.clone() - ct2.clone()), "{spec}: F limit");
                ensure!(exact_limit(&table.cells[input][pf]) == Some(ct2), "{spec}: PF limit");
            } else if t2 > cap {
                name = "ii";
                expected = ["aACR", "inf", "aACR", "0", "aACR"];
                ensure!(exact_limit(&table.cells[input][s]) == Some(cap.clone() / (a.clone() * (t2.clone() - cap.clone()))), "{spec}: S limit {:?}", table.cells[input][s].limit);
                ensure!(exact_limit(&table.cells[input][e]) == Some(t2.clone() - cap.clone()), "{spec}: E limit");
                ensure!(exact_limit(&table.cells[input][pf]) == Some(t3.clone()), "{spec}: PF limit");
            } else {
                name = "iii";
                expected = ["inf", "inf", "0", "0", "aACR"];
            }
            ensure!(row == expected, "{spec} case ({name}): S,P,E,F,PF = {row:?}, expected {expected:?}");
            if input == s {
                regimes.push(name);
            }
        }
        if spec == "all=1" {
            compare_rows(&table, &rows6(&FUTILE_TABLE)).map_err(|m| format!("futile table: {m}"))?;
        }
    }
    for case in ["i", "ii", "iii"] {
        ensure!(regimes.contains(&case), "case ({case}) not exercised");
    }
    let modified = fixtures::futile_cycle_mod();
    let table = build_table(&modified, &uniform_state(6, 1), &cls);
    compare_rows(&table, &rows6(&FUTILE_MOD_TABLE)).map_err(|m| format!("modified futile table: {m}"))?;
    all_certified(&table)?;
    Ok(format!("SE = min(T2, T3/c) in regimes {regimes:?}; both futile-cycle tables match"))
}

fn well_defined(analysis: &NetworkAnalysis) -> bool {
    analysis.rows.iter().all(|r| r.well_defined.as_ref().is_none_or(|w| w.unique))
}

// Guarantee: a robust species in every positive law not containing the input.
fn criterion_6() -> Check {
    let cls = ClassifierOptions::default();
    let mut applicable = 0;
    for (name, _) in fixtures::ALL {
        let net = fixtures::by_name(name).expect("fixture");
        let table = build_table(&net, &uniform_state(net.species_count(), 1), &cls);
        let report = guarantee_report(&net, &table);
        let v = report.violations();
        ensure!(v.is_empty(), "{name}: {} violation(s), first {:?}", v.len(), v[0]);
        applicable += report.entries.len();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a7e);
    let (mut accepted, mut skipped) = (0, 0);
    while accepted < 20 {
        ensure!(skipped < 400, "only {accepted} well-defined random networks after {skipped} rejections");
        let d = rng.gen_range(2..=5);
        let (net, _) = random_conservative_network(&mut rng, d);
        let x0 = random_state(&mut rng, d);
        let analysis = analyze_network(&net, &x0, &cls);
        if !well_defined(&analysis) {
            skipped += 1;
            continue;
        }
        let report = guarantee_report(&net, &analysis.table);
        ensure!(
            report.violations().is_empty(),
            "random network {}:\n{}violations {:?}",
            accepted,
            crnrob_core::parser::serialize(&net),
            report.violations()
        );
        ensure!(!LawSet::of(&net).positive.is_empty(), "random network without a positive law");
        applicable += report.entries.len();
        accepted += 1;
    }
    Ok(format!("{applicable} (input, law) pairs witnessed; 6 fixtures + 20 random networks ({skipped} non-unique skipped)"))
}

fn is_root(r: &RealAlgebraic, q: &UniPoly) -> bool {
    match r.as_rational() {
        Some(v) => q.eval(v) == Q::from_integer(0.into()),
        None => r.is_root_of(q),
    }
}

// Symbolic and numeric results agree pair by pair.
fn criterion_7() -> Check {
    let cls = ClassifierOptions::default();
    let (mut points, mut limits, mut worst) = (0usize, 0usize, 0.0f64);
    for (name, _) in fixtures::ALL {
        let net = fixtures::by_name(name).expect("fixture");
        let analysis = analyze_network(&net, &uniform_state(net.species_count(), 1), &cls);
        for row in &analysis.rows {
            for (j, elim) in row.symbolic.elims.iter().enumerate() {
                let Ok(elim) = elim else { continue };
                for (lambda, value) in row.curves[j].converged_points() {
                    let r = elim.relative_residual(value, lambda);
                    ensure!(r < 1e-6, "{name}: {}->{} residual {r:e} at lambda {lambda}", net.species_names()[row.input], net.species_names()[j]);
                    worst = worst.max(r);
                    points += 1;
                }
                if let Some(LimitValue::Finite(v)) = row.cells[j].limit.as_ref().and_then(|l| l.exact()) {
                    ensure!(is_root(v, &elim.q), "{name}: limit {v} is not a root of q = {}", elim.q);
                    limits += 1;
                }
            }
        }
    }
    Ok(format!("{points} converged points, worst relative residual {worst:.1e}; {limits} exact limits are roots of q"))
}

fn conservation_exactness(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    for n in 0..200 {
        let d = rng.gen_range(1..=6);
        let r = rng.gen_range(1..=8);
        let net = random_network(rng, d, r);
        let x = random_state(rng, d);
        let rhs = net.mass_action_rhs_exact(&x).map_err(|e| e.to_string())?;
        for law in &LawSet::of(&net).basis {
            let dot: Q = law.coeffs.iter().zip(&rhs).map(|(c, f)| c * f).sum();
            ensure!(dot == q(0), "network {n}: law {:?} gives {dot}", law.coeffs);
        }
    }
    Ok(200)
}

fn jacobian_check(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.gen_range(1..=6);
        let r = rng.gen_range(1..=8);
        let net = random_network(rng, d, r);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..5.0)).collect();
        let jac = net.mass_action_jacobian(&x).map_err(|e| e.to_string())?;
        let norm = jac.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for k in 0..d {
            let h = 1e-6 * x[k].max(1.0);
            let (mut up, mut down) = (x.clone(), x.clone());
            up[k] += h;
            down[k] -= h;
            let fu = net.mass_action_rhs(&up).map_err(|e| e.to_string())?;
            let fd = net.mass_action_rhs(&down).map_err(|e| e.to_string())?;
            for i in 0..d {
                let fdiff = (fu[i] - fd[i]) / (2.0 * h);
                let err = (fdiff - jac[(i, k)]).abs() / norm;
                worst = worst.max(err);
            }
        }
    }
    ensure!(worst < 1e-6, "max relative Jacobian error {worst:e}");
    Ok(worst)
}

fn parser_fuzz(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    const ALPHABET: &[u8] = b"ABXY01234 +-<>=;,:#.\n\t_/()kspecie";
    let corpus: Vec<&[u8]> = fixtures::ALL.iter().map(|(_, t)| t.as_bytes()).collect();
    let n = 100_000;
    for k in 0..n {
        let bytes: Vec<u8> = match k % 3 {
            0 => (0..rng.gen_range(0..80)).map(|_| rng.gen()).collect(),
            1 => (0..rng.gen_range(0..120)).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect(),
            _ => {
                let mut b = corpus[rng.gen_range(0..corpus.len())].to_vec();
                for _ in 0..rng.gen_range(1..6) {
                    let pos = rng.gen_range(0..b.len());
                    match rng.gen_range(0..3) {
                        0 => b[pos] = ALPHABET[rng.gen_range(0..ALPHABET.len())],
                        1 => {
                            b.remove(pos);
                        }
                        _ => b.insert(pos, rng.gen()),
                    }
                }
                b
            }
        };
        let outcome = catch_unwind(|| {
            let _ = parse_bytes(&bytes, "fuzz");
            if let Ok(text) = std::str::from_utf8(&bytes) {
                let _ = parse_str(text);
            }
        });
        ensure!(outcome.is_ok(), "parser panicked on {:?}", String::from_utf8_lossy(&bytes));
    }
    Ok(n)
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_crnrob")).args(args).output().map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "crnrob {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn determinism() -> Result<usize, String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../networks");
    let envz = dir.join("envz_ompr.crn");
    let futile = dir.join("futile_cycle.crn");
    let (envz, futile) = (envz.to_str().expect("utf-8 path"), futile.to_str().expect("utf-8 path"));
    let runs: [Vec<&str>; 3] = [
        vec!["table", envz, "--json", "--seed", "7"],
        vec!["sweep", futile, "--input", "S", "--output", "SE", "--format", "csv"],
        vec!["check", futile, "--json", "--seed", "11"],
    ];
    for args in &runs {
        let first = cli(args)?;
        let mut serial = args.clone();
        serial.extend(["--jobs", "1"]);
        ensure!(cli(args)? == first, "repeat run of {args:?} differs");
        ensure!(cli(&serial)? == first, "serial run of {args:?} differs");
    }
    Ok(runs.len())
}

// Property suites at full size.
fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x8);
    let laws = conservation_exactness(&mut rng)?;
    let jac = jacobian_check(&mut rng)?;
    let fuzz = parser_fuzz(&mut rng)?;
    let det = determinism()?;
    Ok(format!(
        "conservation exact on {laws} networks; Jacobian error {jac:.1e}; {fuzz} fuzz inputs without panic; {det} CLI runs byte-identical"
    ))
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [(&str, fn() -> Check); 8] = [
        ("archetypal branches and ACR limit", criterion_1),
        ("modified archetypal closed form and aACR limit", criterion_2),
        ("EnvZ-OmpR ACR value, table and limits", criterion_3),
        ("modified EnvZ-OmpR table", criterion_4),
        ("futile cycle regimes and tables", criterion_5),
        ("positive-law robustness guarantee", criterion_6),
        ("symbolic-numeric consistency", criterion_7),
        ("property suites", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = format!("{}", k + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {id}: {name} ({secs:.1}s) - {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id}: {name} ({secs:.1}s) - {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
