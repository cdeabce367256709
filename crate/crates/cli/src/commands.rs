use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crnrob_core::classifier::{
    analyze_pair, build_table, guarantee_report, ClassificationTable, ClassifierOptions, GuaranteeReport,
};
use crnrob_core::conservation::{totals, LawSet};
use crnrob_core::model::ReactionNetwork;
use crnrob_core::numeric::{
    check_well_defined_detailed, dose_response, empirical_verdict, find_steady_state, LambdaGrid, SolverOptions,
};
use crnrob_core::parser::{parse_bytes, parse_network_with_warnings, serialize, NetworkSource};
use crnrob_core::rational::{format_rational, parse_rational, to_f64, Q};
use crnrob_core::report;
use crnrob_core::symbolic::{analyze_roots, LimitValue};

use crate::args::{Cli, Command, Format, NetworkArgs, PairArgs};
use crate::output::{emit, write_atomic, CliError};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Parse { network } => parse(cli, network),
        Command::Laws { network, x0 } => laws(cli, network, x0.as_deref()),
        Command::Steady { net } => steady(cli, net),
        Command::Sweep { net, pair, lambda, csv, plot } => {
            sweep(cli, net, pair, lambda.as_deref(), csv.as_deref(), plot.as_deref())
        }
        Command::Certify { net, pair, lambda } => certify(cli, net, pair, lambda.as_deref()),
        Command::Table { net, instances, lambda, skip_well_defined } => {
            table(cli, net, instances.as_deref(), lambda.as_deref(), *skip_well_defined)
        }
        Command::Check { net, starts } => check(cli, net, *starts),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn load_network(path: &Path) -> Result<ReactionNetwork, CliError> {
    let bytes = read(path)?;
    let origin = path.display().to_string();
    let parse_err = |diagnostics| CliError::Parse { origin: origin.clone(), diagnostics };
    match std::str::from_utf8(&bytes) {
        Ok(text) => {
            let parsed = parse_network_with_warnings(&NetworkSource::new(text, origin.clone())).map_err(parse_err)?;
            for w in &parsed.warnings {
                eprintln!("{origin}:{w}");
            }
            Ok(parsed.network)
        }
        Err(_) => parse_bytes(&bytes, &origin).map_err(parse_err),
    }
}

fn initial_state(net: &ReactionNetwork, spec: &str) -> Result<Vec<Q>, CliError> {
    net.parse_state(spec).map_err(|e| CliError::Usage(format!("--x0: {e}")))
}

fn species(net: &ReactionNetwork, name: &str, flag: &str) -> Result<usize, CliError> {
    net.species_index(name)
        .ok_or_else(|| CliError::Usage(format!("{flag}: unknown species `{name}`")))
}

fn grid(spec: Option<&str>) -> Result<Option<LambdaGrid>, CliError> {
    spec.map(LambdaGrid::parse).transpose().map_err(|e| CliError::Usage(format!("--lambda: {e}")))
}

fn solver_options(cli: &Cli) -> SolverOptions {
    let mut s = SolverOptions::default();
    let t = &cli.tolerances;
    if let Some(v) = t.final_tol {
        s.final_tol = v;
    }
    if let Some(v) = t.switch_tol {
        s.switch_tol = v;
    }
    if let Some(v) = t.max_steps {
        s.max_steps = v;
    }
    s
}

fn classifier_options(cli: &Cli, lambda: Option<&str>, skip_well_defined: bool) -> Result<ClassifierOptions, CliError> {
    let mut o = ClassifierOptions { solver: solver_options(cli), grid: grid(lambda)?, skip_well_defined, ..Default::default() };
    let t = &cli.tolerances;
    if let Some(v) = t.plateau_tol {
        o.verdict.plateau_tol = v;
    }
    if let Some(v) = t.zero_tol {
        o.verdict.zero_tol = v;
    }
    if let Some(v) = t.slope_tol {
        o.verdict.slope_tol = v;
    }
    if let Some(seed) = cli.seed {
        o.seed = seed;
    }
    Ok(o)
}

fn to_json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn not_csv(cli: &Cli, command: &str) -> Result<(), CliError> {
    if cli.format() == Format::Csv {
        return Err(CliError::Usage(format!("`{command}` has no CSV output")));
    }
    Ok(())
}

fn network_json(net: &ReactionNetwork) -> Value {
    let species = net.species();
    let reactions: Vec<Value> = net
        .reactions()
        .iter()
        .enumerate()
        .map(|(r, rx)| {
            json!({
                "reactant": rx.reactant.render(species),
                "product": rx.product.render(species),
                "rate": net.rate_label(r),
                "value": format_rational(&net.rate_values()[r]),
            })
        })
        .collect();
    let params: BTreeMap<&String, String> = net.parameters().iter().map(|(k, v)| (k, format_rational(v))).collect();
    json!({
        "schema_version": report::SCHEMA_VERSION,
        "species": net.species_names(),
        "reactions": reactions,
        "parameters": params,
    })
}

fn parse(cli: &Cli, path: &Path) -> Result<(), CliError> {
    not_csv(cli, "parse")?;
    let net = load_network(path)?;
    let text = match cli.format() {
        Format::Json => to_json_text(&network_json(&net)),
        _ => serialize(&net),
    };
    emit(cli.out.as_deref(), &text)
}

fn laws(cli: &Cli, path: &Path, x0: Option<&str>) -> Result<(), CliError> {
    not_csv(cli, "laws")?;
    let net = load_network(path)?;
    let names = net.species_names();
    let set = LawSet::of(&net);
    let state = x0.map(|s| initial_state(&net, s)).transpose()?;
    let total_of = |law: &crnrob_core::conservation::ConservationLaw| {
        state.as_ref().map(|x| format_rational(&totals(std::slice::from_ref(law), x).values[0]))
    };
    let text = match cli.format() {
        Format::Json => {
            let render = |laws: &[crnrob_core::conservation::ConservationLaw]| -> Vec<Value> {
                laws.iter()
                    .map(|l| {
                        json!({
                            "law": l.render(&names),
                            "coefficients": l.coeffs.iter().map(format_rational).collect::<Vec<_>>(),
                            "positive": l.positive,
                            "total": total_of(l),
                        })
                    })
                    .collect()
            };
            to_json_text(&json!({
                "schema_version": report::SCHEMA_VERSION,
                "species": names,
                "basis": render(&set.basis),
                "positive": render(&set.positive),
                "working": render(&set.working),
            }))
        }
        _ => {
            let mut out = String::new();
            let mut section = |title: &str, laws: &[crnrob_core::conservation::ConservationLaw]| {
                out.push_str(&format!("{title} ({}):\n", laws.len()));
                for l in laws {
                    match total_of(l) {
                        Some(t) => out.push_str(&format!("  {} = {t}\n", l.render(&names))),
                        None => out.push_str(&format!("  {}\n", l.render(&names))),
                    }
                }
            };
            section("basis", &set.basis);
            section("positive", &set.positive);
            section("working", &set.working);
            out
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn steady(cli: &Cli, args: &NetworkArgs) -> Result<(), CliError> {
    let net = load_network(&args.network)?;
    let x0: Vec<f64> = initial_state(&net, &args.x0)?.iter().map(to_f64).collect();
    let ss = find_steady_state(&net, &x0, &solver_options(cli));
    let names = net.species_names();
    let text = match cli.format() {
        Format::Json => to_json_text(&json!({
            "schema_version": report::SCHEMA_VERSION,
            "species": names,
            "state": ss.x,
            "residual": ss.residual,
            "scaled_residual": ss.scaled_residual,
            "converged": ss.converged,
            "totals": ss.compat_class,
        })),
        Format::Csv => {
            let mut out = String::from("species,value\n");
            for (n, v) in names.iter().zip(&ss.x) {
                out.push_str(&format!("{n},{v:e}\n"));
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for (n, v) in names.iter().zip(&ss.x) {
                out.push_str(&format!("{n:<8} {v:.12e}\n"));
            }
            out.push_str(&format!(
                "converged: {} (scaled residual {:e})\n",
                ss.converged, ss.scaled_residual
            ));
            out
        }
    };
    emit(cli.out.as_deref(), &text)?;
    if !ss.converged {
        return Err(CliError::Analysis(format!("no converged steady state (scaled residual {:e})", ss.scaled_residual)));
    }
    Ok(())
}

fn default_grid(net: &ReactionNetwork, x0: &[Q]) -> LambdaGrid {
    let set = LawSet::of(net);
    let scale = totals(&set.working, x0).values.iter().map(to_f64).fold(0.0f64, |a, b| a.max(b.abs()));
    let scale = if scale > 0.0 { scale } else { x0.iter().map(to_f64).fold(1.0f64, f64::max) };
    LambdaGrid::default_for(scale)
}

fn sweep(
    cli: &Cli,
    args: &NetworkArgs,
    pair: &PairArgs,
    lambda: Option<&str>,
    csv: Option<&Path>,
    plot: Option<&Path>,
) -> Result<(), CliError> {
    let net = load_network(&args.network)?;
    let x0q = initial_state(&net, &args.x0)?;
    let input = species(&net, &pair.input, "--input")?;
    let output = species(&net, &pair.output, "--output")?;
    let opts = classifier_options(cli, lambda, false)?;
    let lambdas = opts.grid.clone().unwrap_or_else(|| default_grid(&net, &x0q)).points();
    let x0: Vec<f64> = x0q.iter().map(to_f64).collect();
    let curve = dose_response(&net, &x0, input, output, &lambdas, &opts.solver);
    let verdict = empirical_verdict(&curve, &opts.verdict);
    let names = net.species_names();
    if let Some(p) = csv {
        write_atomic(p, &report::curve_csv(&curve))?;
    }
    if let Some(p) = plot {
        let (_, row) = analyze_pair(&net, &x0q, input, &ClassifierOptions { grid: Some(grid_of(&lambdas)), ..opts.clone() });
        write_atomic(p, &report::plot_csv(&curve, Some(&row.cells[output])))?;
    }
    let text = match cli.format() {
        Format::Json => {
            let mut v = report::curve_json(&curve, &names);
            v["verdict"] = json!(verdict);
            to_json_text(&v)
        }
        Format::Csv => report::curve_csv(&curve),
        Format::Text => {
            let mut out = format!("{:>14} {:>22} {:>12}  converged\n", "lambda", names[output], "residual");
            for k in 0..curve.lambdas.len() {
                out.push_str(&format!(
                    "{:>14.6e} {:>22.15e} {:>12.3e}  {}\n",
                    curve.lambdas[k], curve.values[k], curve.residuals[k], curve.converged[k]
                ));
            }
            let est = verdict.limit_estimate.map(|v| format!(", estimate {v:.9e}")).unwrap_or_default();
            out.push_str(&format!("verdict: {:?} (tail slope {:.4}{est})\n", verdict.kind, verdict.tail_slope));
            out
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn grid_of(lambdas: &[f64]) -> LambdaGrid {
    LambdaGrid { start: lambdas[0], stop: lambdas[lambdas.len() - 1], count: lambdas.len() }
}

fn limit_json(v: &LimitValue) -> Value {
    json!({ "value": v.to_string(), "approx": v.to_f64() })
}

fn certify(cli: &Cli, args: &NetworkArgs, pair: &PairArgs, lambda: Option<&str>) -> Result<(), CliError> {
    not_csv(cli, "certify")?;
    let net = load_network(&args.network)?;
    let x0 = initial_state(&net, &args.x0)?;
    let input = species(&net, &pair.input, "--input")?;
    let output = species(&net, &pair.output, "--output")?;
    let opts = classifier_options(cli, lambda, false)?;
    let (_, row) = analyze_pair(&net, &x0, input, &opts);
    let cell = &row.cells[output];
    let verdict = &row.verdicts[output];
    let elim = row.symbolic.elims[output].as_ref();
    let candidates: Vec<Value> =
        row.symbolic.joint[output].iter().flatten().map(limit_json).collect();
    let exact = cell.limit.as_ref().and_then(|l| l.exact()).map(limit_json);
    let v = match elim {
        Ok(e) => {
            let roots = analyze_roots(&e.q);
            json!({
                "schema_version": report::SCHEMA_VERSION,
                "input": pair.input,
                "output": pair.output,
                "P": e.specialized.to_string(),
                "P_totals": e.poly.to_string(),
                "q": e.q.render("x"),
                "m_deg": e.m_deg,
                "lambda_dependent": e.lambda_dependent,
                "roots": roots.nonneg_roots.iter().map(|r| json!({"value": r.to_string(), "approx": r.to_f64()})).collect::<Vec<_>>(),
                "candidates": candidates,
                "verdict": verdict,
                "kind": cell.kind,
                "provenance": cell.provenance,
                "exact_limit": exact,
                "notes": cell.notes,
            })
        }
        Err(err) => json!({
            "schema_version": report::SCHEMA_VERSION,
            "input": pair.input,
            "output": pair.output,
            "P": Value::Null,
            "elimination_error": err.to_string(),
            "candidates": candidates,
            "verdict": verdict,
            "kind": cell.kind,
            "provenance": cell.provenance,
            "exact_limit": exact,
            "notes": cell.notes,
        }),
    };
    let text = match cli.format() {
        Format::Json => to_json_text(&v),
        _ => {
            let mut out = format!("{} -> {}\n", pair.input, pair.output);
            match elim {
                Ok(e) => {
                    out.push_str(&format!("P(x, lambda) = {}\n", e.specialized));
                    out.push_str(&format!("q(x) = {}\n", e.q.render("x")));
                    out.push_str(&format!("lambda degree = {}\n", e.m_deg));
                    let roots = analyze_roots(&e.q);
                    let r: Vec<String> = roots.nonneg_roots.iter().map(ToString::to_string).collect();
                    out.push_str(&format!("nonnegative roots of q: [{}]\n", r.join(", ")));
                }
                Err(err) => out.push_str(&format!("elimination failed: {err}\n")),
            }
            let c: Vec<String> = row.symbolic.joint[output].iter().flatten().map(ToString::to_string).collect();
            out.push_str(&format!("consistent limits: [{}]\n", c.join(", ")));
            out.push_str(&format!("numeric verdict: {:?}\n", verdict.kind));
            let limit = cell.limit.as_ref().map(|l| format!(" {l}")).unwrap_or_default();
            out.push_str(&format!("classification: {}{limit} ({:?})\n", cell.kind, cell.provenance));
            for n in &cell.notes {
                out.push_str(&format!("note: {n}\n"));
            }
            out
        }
    };
    emit(cli.out.as_deref(), &text)
}

#[derive(Debug, Deserialize)]
struct Instance {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    parameters: BTreeMap<String, Value>,
    #[serde(default)]
    x0: Option<String>,
}

fn rational_value(v: &Value) -> Option<Q> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => None,
    }
}

fn load_instances(path: &Path) -> Result<Vec<Instance>, CliError> {
    let bytes = read(path)?;
    serde_json::from_slice::<Vec<Instance>>(&bytes)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn table_output(table: &ClassificationTable, guarantee: &GuaranteeReport) -> Value {
    let mut v = report::table_json(table);
    v["guarantee_violations"] = json!(guarantee
        .violations()
        .iter()
        .map(|g| json!({ "input": g.input, "law": g.law }))
        .collect::<Vec<_>>());
    v
}

fn table(
    cli: &Cli,
    args: &NetworkArgs,
    instances: Option<&Path>,
    lambda: Option<&str>,
    skip_well_defined: bool,
) -> Result<(), CliError> {
    let base = load_network(&args.network)?;
    let opts = classifier_options(cli, lambda, skip_well_defined)?;
    let Some(path) = instances else {
        let x0 = initial_state(&base, &args.x0)?;
        let t = build_table(&base, &x0, &opts);
        let g = guarantee_report(&base, &t);
        let text = match cli.format() {
            Format::Json => to_json_text(&table_output(&t, &g)),
            Format::Csv => report::table_csv(&t),
            Format::Text => {
                let mut out = report::table_text(&t);
                for v in g.violations() {
                    out.push_str(&format!("warning: guarantee violated for input {} and law {}\n", v.input, v.law));
                }
                out
            }
        };
        emit(cli.out.as_deref(), &text)?;
        if !g.violations().is_empty() {
            return Err(CliError::Analysis("conservation-law guarantee violated".into()));
        }
        return Ok(());
    };
    let list = load_instances(path)?;
    if list.is_empty() {
        return Err(CliError::Usage(format!("{}: no instances", path.display())));
    }
    let mut tables = Vec::new();
    for (k, inst) in list.iter().enumerate() {
        let name = inst.name.clone().unwrap_or_else(|| format!("instance{k}"));
        let mut overrides = BTreeMap::new();
        for (p, v) in &inst.parameters {
            let value = rational_value(v)
                .ok_or_else(|| CliError::Usage(format!("{name}: parameter `{p}` is not a rational number")))?;
            overrides.insert(p.clone(), value);
        }
        let net = base.with_parameters(&overrides).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
        let x0 = initial_state(&net, inst.x0.as_deref().unwrap_or(&args.x0))?;
        let t = build_table(&net, &x0, &opts);
        let g = guarantee_report(&net, &t);
        tables.push((name, t, g));
    }
    let reference = &tables[0].1;
    let mut diffs = Vec::new();
    for (name, t, _) in &tables[1..] {
        for (i, row) in t.cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let r = &reference.cells[i][j];
                let a = report_label(r);
                let b = report_label(c);
                if a != b {
                    diffs.push((name.clone(), t.species[i].clone(), t.species[j].clone(), a, b));
                }
            }
        }
    }
    let text = match cli.format() {
        Format::Json => {
            let items: Vec<Value> = tables
                .iter()
                .map(|(n, t, g)| json!({ "name": n, "table": table_output(t, g) }))
                .collect();
            let d: Vec<Value> = diffs
                .iter()
                .map(|(n, i, j, a, b)| json!({ "instance": n, "input": i, "output": j, "reference": a, "value": b }))
                .collect();
            to_json_text(&json!({ "schema_version": report::SCHEMA_VERSION, "instances": items, "diff": d }))
        }
        Format::Csv => {
            let mut out = String::from("instance,input,output,reference,value\n");
            for (n, i, j, a, b) in &diffs {
                out.push_str(&format!("{n},{i},{j},{a},{b}\n"));
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for (n, t, _) in &tables {
                out.push_str(&format!("[{n}]\n{}\n", report::table_text(t)));
            }
            if diffs.is_empty() {
                out.push_str(&format!("all instances agree with {}\n", tables[0].0));
            } else {
                out.push_str(&format!("differences from {}:\n", tables[0].0));
                for (n, i, j, a, b) in &diffs {
                    out.push_str(&format!("  {n}: {i} -> {j}: {a} vs {b}\n"));
                }
            }
            out
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn report_label(c: &crnrob_core::classifier::Classification) -> String {
    match &c.limit {
        Some(l) if c.is_robust() => format!("{}({l})", c.kind),
        _ => c.kind.to_string(),
    }
}

fn check(cli: &Cli, args: &NetworkArgs, starts: usize) -> Result<(), CliError> {
    not_csv(cli, "check")?;
    let net = load_network(&args.network)?;
    let x0q = initial_state(&net, &args.x0)?;
    let names = net.species_names();
    let set = LawSet::of(&net);
    let base_totals = totals(&set.working, &x0q).values;
    let scale = base_totals.iter().map(to_f64).fold(0.0f64, |a, b| a.max(b.abs()));
    let scale = if scale > 0.0 { scale } else { x0q.iter().map(to_f64).fold(1.0f64, f64::max) };
    let probe = 10.0 * scale;
    let x0: Vec<f64> = x0q.iter().map(to_f64).collect();
    let opts = classifier_options(cli, None, false)?;
    let conservative = !set.positive.is_empty()
        && (0..names.len()).all(|s| set.positive.iter().any(|l| l.contains(s)));
    let results: Vec<_> = (0..names.len())
        .map(|i| check_well_defined_detailed(&net, &x0, i, probe, starts, opts.seed, &opts.solver))
        .collect();
    let all_unique = results.iter().all(|r| r.unique);
    let text = match cli.format() {
        Format::Json => to_json_text(&json!({
            "schema_version": report::SCHEMA_VERSION,
            "species": names,
            "reactions": net.reactions().len(),
            "rank": net.stoichiometric_matrix().rank(),
            "laws": set.working.iter().map(|l| l.render(&names)).collect::<Vec<_>>(),
            "totals": base_totals.iter().map(format_rational).collect::<Vec<_>>(),
            "conservative": conservative,
            "probe_lambda": probe,
            "well_defined": names.iter().zip(&results).map(|(n, r)| json!({
                "input": n, "unique": r.unique, "warnings": r.warnings,
            })).collect::<Vec<_>>(),
        })),
        _ => {
            let mut out = format!(
                "{} species, {} reactions, rank {}\n",
                names.len(),
                net.reactions().len(),
                net.stoichiometric_matrix().rank()
            );
            for (l, t) in set.working.iter().zip(&base_totals) {
                out.push_str(&format!("law: {} = {}\n", l.render(&names), format_rational(t)));
            }
            out.push_str(&format!("every species in a positive law: {conservative}\n"));
            for (n, r) in names.iter().zip(&results) {
                let status = if r.unique { "unique".to_string() } else { r.warnings.join("; ") };
                out.push_str(&format!("input {n} at lambda {probe:e}: {status}\n"));
            }
            out
        }
    };
    emit(cli.out.as_deref(), &text)?;
    if !all_unique {
        return Err(CliError::Analysis("steady state not unique for some input".into()));
    }
    Ok(())
}
