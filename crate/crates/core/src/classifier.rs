//! Per-pair classification of dose-response behaviour and full tables.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::conservation::totals;
use crate::model::ReactionNetwork;
use crate::numeric::{
    check_well_defined_detailed, empirical_verdict, sweep_states, DoseResponseCurve, EmpiricalVerdict, LambdaGrid,
    SolverContext, SolverOptions, SteadyState, VerdictKind, VerdictOptions, WellDefinedness, DEFAULT_SEED,
};
use crate::rational::{format_rational, to_f64, Q};
use crate::symbolic::joint::{analyze_row, RowAnalysis};
use crate::symbolic::limits::verdict_agrees;
use crate::symbolic::{certify_candidates, propagate_limits, CertifiedLimit, LimitValue, SymbolicModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellKind {
    #[serde(rename = "ACR")]
    Acr,
    #[serde(rename = "aACR")]
    Aacr,
    Divergent,
    Extinct,
    Undetermined,
}

impl CellKind {
    pub fn label(self) -> &'static str {
        match self {
            CellKind::Acr => "ACR",
            CellKind::Aacr => "aACR",
            CellKind::Divergent => "Divergent",
            CellKind::Extinct => "Extinct",
            CellKind::Undetermined => "Undetermined",
        }
    }

    /// Compact label used in aligned tables.
    pub fn short(self) -> &'static str {
        match self {
            CellKind::Acr => "ACR",
            CellKind::Aacr => "aACR",
            CellKind::Divergent => "inf",
            CellKind::Extinct => "0",
            CellKind::Undetermined => "?",
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    SymbolicCertified,
    NumericInferred,
    Hybrid,
}

/// Limit attached to a cell: exact, or a numeric estimate.
#[derive(Clone, Debug)]
pub enum CellLimit {
    Exact(LimitValue),
    Estimate(f64),
}

impl CellLimit {
    pub fn to_f64(&self) -> f64 {
        match self {
            CellLimit::Exact(v) => v.to_f64(),
            CellLimit::Estimate(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&LimitValue> {
        match self {
            CellLimit::Exact(v) => Some(v),
            CellLimit::Estimate(_) => None,
        }
    }
}

impl fmt::Display for CellLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLimit::Exact(v) => write!(f, "{v}"),
            CellLimit::Estimate(v) => write!(f, "~{v:.6e}"),
        }
    }
}

impl Serialize for CellLimit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub kind: CellKind,
    pub limit: Option<CellLimit>,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

impl Classification {
    fn undetermined(provenance: Provenance, note: impl Into<String>) -> Self {
        Classification { kind: CellKind::Undetermined, limit: None, provenance, notes: vec![note.into()] }
    }

    pub fn is_robust(&self) -> bool {
        matches!(self.kind, CellKind::Acr | CellKind::Aacr)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationTable {
    pub species: Vec<String>,
    /// `cells[i][j]`: input `i`, output `j`.
    pub cells: Vec<Vec<Classification>>,
    pub base_x0: Vec<String>,
    pub rate_constants: BTreeMap<String, String>,
}

impl ClassificationTable {
    pub fn kinds(&self) -> Vec<Vec<CellKind>> {
        self.cells.iter().map(|r| r.iter().map(|c| c.kind).collect()).collect()
    }

    /// One row of short labels per input.
    pub fn pattern(&self) -> Vec<Vec<&'static str>> {
        self.cells.iter().map(|r| r.iter().map(|c| c.kind.short()).collect()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifierOptions {
    pub solver: SolverOptions,
    pub verdict: VerdictOptions,
    /// Overrides the default grid scaled by the largest total.
    pub grid: Option<LambdaGrid>,
    pub seed: u64,
    pub well_defined_starts: usize,
    /// Shift at which uniqueness is probed; defaults to ten times the largest total.
    pub lambda_probe: Option<f64>,
    pub skip_well_defined: bool,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        ClassifierOptions {
            solver: SolverOptions::default(),
            verdict: VerdictOptions::default(),
            grid: None,
            seed: DEFAULT_SEED,
            well_defined_starts: 5,
            lambda_probe: None,
            skip_well_defined: false,
        }
    }
}

/// Everything computed for one input species.
#[derive(Clone, Debug)]
pub struct RowReport {
    pub input: usize,
    pub symbolic: RowAnalysis,
    pub lambdas: Vec<f64>,
    pub states: Vec<SteadyState>,
    pub curves: Vec<DoseResponseCurve>,
    pub verdicts: Vec<EmpiricalVerdict>,
    pub well_defined: Option<WellDefinedness>,
    pub cells: Vec<Classification>,
}

#[derive(Clone, Debug)]
pub struct NetworkAnalysis {
    pub model: SymbolicModel,
    pub base_totals: Vec<Q>,
    pub rows: Vec<RowReport>,
    pub table: ClassificationTable,
}

fn scale_of(base_totals: &[Q], x0: &[f64]) -> f64 {
    let m = base_totals.iter().map(to_f64).fold(0.0f64, |a, b| a.max(b.abs()));
    if m > 0.0 {
        m
    } else {
        x0.iter().fold(1.0f64, |a, b| a.max(b.abs()))
    }
}

fn kind_of(certified: &CertifiedLimit) -> Option<(CellKind, Option<CellLimit>)> {
    Some(match certified {
        CertifiedLimit::EventuallyConstant(r) => (CellKind::Acr, Some(CellLimit::Exact(LimitValue::Finite(r.clone())))),
        CertifiedLimit::ExactLimit(r) => (CellKind::Aacr, Some(CellLimit::Exact(LimitValue::Finite(r.clone())))),
        CertifiedLimit::Zero => (CellKind::Extinct, Some(CellLimit::Exact(LimitValue::Zero))),
        CertifiedLimit::Infinity => (CellKind::Divergent, None),
        CertifiedLimit::Ambiguous(_) => return None,
    })
}

fn exact_value(c: &CertifiedLimit) -> Option<LimitValue> {
    match c {
        CertifiedLimit::EventuallyConstant(r) | CertifiedLimit::ExactLimit(r) => Some(LimitValue::Finite(r.clone())),
        CertifiedLimit::Zero => Some(LimitValue::Zero),
        CertifiedLimit::Infinity => Some(LimitValue::Infinity),
        CertifiedLimit::Ambiguous(_) => None,
    }
}

fn numeric_only(verdict: &EmpiricalVerdict, mut notes: Vec<String>) -> Classification {
    let (kind, limit) = match verdict.kind {
        VerdictKind::FinitePositiveLimit => (CellKind::Aacr, verdict.limit_estimate.map(CellLimit::Estimate)),
        VerdictKind::DecaysToZero => (CellKind::Extinct, Some(CellLimit::Exact(LimitValue::Zero))),
        VerdictKind::DivergesToInfinity => (CellKind::Divergent, None),
        VerdictKind::Inconclusive => {
            notes.push("numeric verdict inconclusive".into());
            (CellKind::Undetermined, None)
        }
    };
    Classification { kind, limit, provenance: Provenance::NumericInferred, notes }
}

fn render_set(set: &[LimitValue]) -> String {
    set.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Combines the symbolic row analysis with the numeric verdict for output `j`.
fn classify_cell(
    row: &RowAnalysis,
    j: usize,
    verdict: Option<&EmpiricalVerdict>,
    propagated: &BTreeMap<usize, Option<LimitValue>>,
) -> Classification {
    let mut notes = Vec::new();
    if !row.pruned {
        notes.push("joint consistency search did not prune candidates".to_string());
    }
    let symbolic = match (&row.elims[j], &row.joint[j]) {
        (Ok(elim), Some(set)) if !set.is_empty() => {
            match certify_candidates(elim, set, None) {
                CertifiedLimit::Ambiguous(cands) => {
                    let resolved = certify_candidates(elim, &cands, verdict);
                    if let Some((kind, limit)) = kind_of(&resolved) {
                        notes.push(format!("ambiguity among {{{}}} resolved numerically", render_set(&cands)));
                        return Classification { kind, limit, provenance: Provenance::Hybrid, notes };
                    }
                    notes.push(format!("candidates {{{}}} unresolved", render_set(&cands)));
                    None
                }
                c => Some(c),
            }
        }
        (Ok(_), _) => {
            notes.push("no jointly consistent limit candidate".into());
            None
        }
        (Err(e), _) => match propagated.get(&j).cloned().flatten() {
            Some(v) => {
                notes.push(format!("{e}; limit propagated through the parametrization"));
                Some(match v {
                    LimitValue::Zero => CertifiedLimit::Zero,
                    LimitValue::Infinity => CertifiedLimit::Infinity,
                    LimitValue::Finite(r) => CertifiedLimit::ExactLimit(r),
                })
            }
            None => {
                notes.push(e.to_string());
                None
            }
        },
    };
    let Some(certified) = symbolic else {
        return match verdict {
            Some(v) => numeric_only(v, notes),
            None => Classification { kind: CellKind::Undetermined, limit: None, provenance: Provenance::NumericInferred, notes },
        };
    };
    let (kind, limit) = kind_of(&certified).expect("not ambiguous");
    if let (Some(v), Some(value)) = (verdict, exact_value(&certified)) {
        if verdict_agrees(&value, v) == Some(false) {
            notes.push(format!(
                "conflict: symbolic limit {value} but numeric verdict {:?} (estimate {:?})",
                v.kind, v.limit_estimate
            ));
            return Classification { kind: CellKind::Undetermined, limit: None, provenance: Provenance::Hybrid, notes };
        }
    }
    Classification { kind, limit, provenance: Provenance::SymbolicCertified, notes }
}

/// Limits of solved species implied by unique joint limits of the free species.
fn propagate_row(model: &SymbolicModel, row: &RowAnalysis) -> BTreeMap<usize, Option<LimitValue>> {
    let Some(param) = &model.parametrization else { return BTreeMap::new() };
    let mut known = BTreeMap::new();
    for &f in &param.free {
        match &row.joint[f] {
            Some(set) if set.len() == 1 => {
                known.insert(f, set[0].clone());
            }
            _ => return BTreeMap::new(),
        }
    }
    propagate_limits(param, &known)
}

fn analyze_input(
    net: &ReactionNetwork,
    ctx: &SolverContext<'_>,
    model: &SymbolicModel,
    base_totals: &[Q],
    x0: &[f64],
    input: usize,
    grid: &[f64],
    probe: f64,
    opts: &ClassifierOptions,
) -> RowReport {
    let symbolic = analyze_row(model, base_totals, input);
    let states = sweep_states(ctx, x0, input, grid, &opts.solver);
    let d = net.species_count();
    let curves: Vec<DoseResponseCurve> =
        (0..d).map(|j| DoseResponseCurve::from_states(input, j, grid, &states, x0)).collect();
    let verdicts: Vec<EmpiricalVerdict> = curves.iter().map(|c| empirical_verdict(c, &opts.verdict)).collect();
    let well_defined = (!opts.skip_well_defined).then(|| {
        check_well_defined_detailed(net, x0, input, probe, opts.well_defined_starts, opts.seed, &opts.solver)
    });
    let cells = match &well_defined {
        Some(w) if !w.unique => {
            let note = format!("dose-response not well defined: {}", w.warnings.join("; "));
            (0..d).map(|_| Classification::undetermined(Provenance::NumericInferred, note.clone())).collect()
        }
        _ => {
            let propagated = propagate_row(model, &symbolic);
            (0..d).map(|j| classify_cell(&symbolic, j, Some(&verdicts[j]), &propagated)).collect()
        }
    };
    RowReport { input, symbolic, lambdas: grid.to_vec(), states, curves, verdicts, well_defined, cells }
}

fn prepare(net: &ReactionNetwork, x0: &[Q], opts: &ClassifierOptions) -> (SymbolicModel, Vec<Q>, Vec<f64>, Vec<f64>, f64) {
    let model = SymbolicModel::build(net);
    let base_totals = totals(&model.laws.working, x0).values;
    let x0f: Vec<f64> = x0.iter().map(to_f64).collect();
    let scale = scale_of(&base_totals, &x0f);
    let grid = opts.grid.clone().unwrap_or_else(|| LambdaGrid::default_for(scale)).points();
    let probe = opts.lambda_probe.unwrap_or(10.0 * scale);
    (model, base_totals, x0f, grid, probe)
}

/// Symbolic and numeric analysis of every input row.
pub fn analyze_network(net: &ReactionNetwork, x0: &[Q], opts: &ClassifierOptions) -> NetworkAnalysis {
    let (model, base_totals, x0f, grid, probe) = prepare(net, x0, opts);
    let ctx = SolverContext::new(net);
    let rows: Vec<RowReport> = (0..net.species_count())
        .into_par_iter()
        .map(|i| analyze_input(net, &ctx, &model, &base_totals, &x0f, i, &grid, probe, opts))
        .collect();
    let table = ClassificationTable {
        species: net.species_names(),
        cells: rows.iter().map(|r| r.cells.clone()).collect(),
        base_x0: x0.iter().map(format_rational).collect(),
        rate_constants: (0..net.reactions().len())
            .map(|r| (net.rate_label(r), format_rational(&net.rate_values()[r])))
            .collect(),
    };
    NetworkAnalysis { model, base_totals, rows, table }
}

pub fn build_table(net: &ReactionNetwork, x0: &[Q], opts: &ClassifierOptions) -> ClassificationTable {
    analyze_network(net, x0, opts).table
}

pub fn analyze_pair(net: &ReactionNetwork, x0: &[Q], input: usize, opts: &ClassifierOptions) -> (SymbolicModel, RowReport) {
    let (model, base_totals, x0f, grid, probe) = prepare(net, x0, opts);
    let ctx = SolverContext::new(net);
    let row = analyze_input(net, &ctx, &model, &base_totals, &x0f, input, &grid, probe, opts);
    (model, row)
}

pub fn classify_pair(net: &ReactionNetwork, x0: &[Q], input: usize, output: usize, opts: &ClassifierOptions) -> Classification {
    analyze_pair(net, x0, input, opts).1.cells[output].clone()
}

#[derive(Clone, Debug, Serialize)]
pub struct GuaranteeEntry {
    pub input: String,
    pub law: String,
    pub support: Vec<String>,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GuaranteeReport {
    pub entries: Vec<GuaranteeEntry>,
}

impl GuaranteeReport {
    pub fn violations(&self) -> Vec<&GuaranteeEntry> {
        self.entries.iter().filter(|e| e.witnesses.is_empty()).collect()
    }
}

/// For each input and each positive law not containing it, the robust species in the law's support.
pub fn guarantee_report(net: &ReactionNetwork, table: &ClassificationTable) -> GuaranteeReport {
    let names = net.species_names();
    let laws = crate::conservation::LawSet::of(net);
    let mut entries = Vec::new();
    for i in 0..net.species_count() {
        for law in laws.positive.iter().filter(|l| !l.contains(i)) {
            entries.push(GuaranteeEntry {
                input: names[i].clone(),
                law: law.render(&names),
                support: law.support.iter().map(|&s| names[s].clone()).collect(),
                witnesses: law
                    .support
                    .iter()
                    .filter(|&&j| table.cells[i][j].is_robust())
                    .map(|&j| names[j].clone())
                    .collect(),
            });
        }
    }
    GuaranteeReport { entries }
}
