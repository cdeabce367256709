use crnrob_core::classifier::{analyze_network, build_table, CellKind, ClassifierOptions, Provenance};
use crnrob_core::fixtures;
use crnrob_core::model::uniform_state;
use crnrob_core::numeric::LambdaGrid;
use crnrob_core::rational::{to_f64, Q};
use crnrob_core::symbolic::SymbolicModel;

fn each_fixture() -> impl Iterator<Item = (&'static str, crnrob_core::model::ReactionNetwork)> {
    fixtures::ALL.iter().map(|(name, _)| (*name, fixtures::by_name(name).unwrap()))
}

#[test]
fn q_is_the_leading_lambda_coefficient() {
    for (name, net) in each_fixture() {
        let model = SymbolicModel::build(&net);
        let x0 = uniform_state(net.species_count(), 1);
        let totals = crnrob_core::conservation::totals(&model.laws.working, &x0).values;
        for i in 0..net.species_count() {
            for j in 0..net.species_count() {
                let Ok(e) = model.specialize(j, i, &totals) else { continue };
                let coeffs = e.specialized.coeffs_in(1);
                assert_eq!(coeffs.len() as u32, e.m_deg + 1, "{name} {i}->{j}");
                assert_eq!(coeffs[e.m_deg as usize].to_univariate(0), e.q, "{name} {i}->{j}");
            }
        }
    }
}

#[test]
fn parametrization_solves_every_equation() {
    let mut checked = 0;
    for (name, net) in each_fixture() {
        let model = SymbolicModel::build(&net);
        let Some(param) = &model.parametrization else { continue };
        for eq in &model.steady_state {
            assert!(param.apply(eq).is_zero(), "{name}: {eq}");
        }
        checked += 1;
    }
    assert!(checked >= 4);
}

fn certified(table: &crnrob_core::classifier::ClassificationTable) -> Vec<(usize, usize, CellKind, String)> {
    let mut out = Vec::new();
    for (i, row) in table.cells.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if c.provenance == Provenance::SymbolicCertified {
                out.push((i, j, c.kind, c.limit.as_ref().map(ToString::to_string).unwrap_or_default()));
            }
        }
    }
    out
}

#[test]
fn certified_cells_ignore_seed_and_grid() {
    for name in ["envz_ompr", "futile_cycle_mod"] {
        let net = fixtures::by_name(name).unwrap();
        let x0 = uniform_state(net.species_count(), 1);
        let base = build_table(&net, &x0, &ClassifierOptions::default());
        let other = ClassifierOptions {
            seed: 99,
            grid: Some(LambdaGrid::new(1.0, 1e7, 31).unwrap()),
            ..Default::default()
        };
        let alt = build_table(&net, &x0, &other);
        assert!(!certified(&base).is_empty());
        assert_eq!(certified(&base), certified(&alt), "{name}");
    }
}

#[test]
fn limits_depend_only_on_totals() {
    let net = fixtures::envz_ompr();
    let a = net.parse_state("all=1").unwrap();
    let b = net.parse_state("X=1/2,XT=3/2,XP=1,Y=3/4,YP=5/4,XPY=1,XTYP=1").unwrap();
    let opts = ClassifierOptions::default();
    let ta = build_table(&net, &a, &opts);
    let tb = build_table(&net, &b, &opts);
    assert_eq!(certified(&ta), certified(&tb));
}

/// Pairs whose error decays like `λ^(-1/2)`; they reach 1% only past `10^4` times the largest total.
const SLOW_TAILS: [(&str, &str, &str); 2] = [("futile_cycle_mod", "SE", "PF"), ("futile_cycle_mod", "PF", "SE")];

#[test]
fn acr_curves_are_flat_and_aacr_tails_converge() {
    for (name, net) in each_fixture() {
        let x0 = uniform_state(net.species_count(), 1);
        let analysis = analyze_network(&net, &x0, &ClassifierOptions::default());
        let names = net.species_names();
        let scale = analysis.base_totals.iter().map(to_f64).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for row in &analysis.rows {
            for (j, cell) in row.cells.iter().enumerate() {
                let Some(limit) = cell.limit.as_ref() else { continue };
                let target = limit.to_f64();
                let points = row.curves[j].converged_points();
                match cell.kind {
                    CellKind::Acr if name.starts_with("envz") => {
                        for (_, v) in &points {
                            assert!((v - target).abs() <= 1e-8 * target, "{name}: ACR value {v} vs {target}");
                        }
                    }
                    CellKind::Aacr if SLOW_TAILS.contains(&(name, names[row.input].as_str(), names[j].as_str())) => {
                        let errors: Vec<f64> = points.iter().map(|(_, v)| (v - target).abs()).collect();
                        assert!(errors.windows(2).skip(errors.len() / 2).all(|w| w[1] <= w[0]), "{name}: tail not monotone");
                        for (_, v) in points.iter().filter(|(l, _)| *l >= 1e5 * scale) {
                            assert!((v - target).abs() <= 0.01 * target);
                        }
                    }
                    CellKind::Aacr => {
                        for (l, v) in points.iter().filter(|(l, _)| *l >= 1e3 * scale) {
                            assert!((v - target).abs() <= 0.01 * target, "{name}: tail {v} vs {target} at {l}");
                        }
                    }
                    _ => {}
                }
            }
        }
    }
}

#[test]
fn archetypal_acr_holds_beyond_threshold() {
    let net = fixtures::archetypal();
    let analysis = analyze_network(&net, &uniform_state(2, 1), &ClassifierOptions::default());
    let limit: Q = net.parameters()["beta"].clone() / net.parameters()["alpha"].clone();
    for row in &analysis.rows {
        assert_eq!(row.cells[0].kind, CellKind::Acr);
        for (_, v) in row.curves[0].converged_points() {
            assert!((v - to_f64(&limit)).abs() <= 1e-8);
        }
    }
}

#[test]
fn every_fixture_is_well_defined_at_unit_state() {
    for (name, net) in each_fixture() {
        let x0 = vec![1.0; net.species_count()];
        for i in 0..net.species_count() {
            assert!(crnrob_core::numeric::check_well_defined(&net, &x0, i, 50.0, 5), "{name} input {i}");
        }
    }
}
