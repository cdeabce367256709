//! Exact elimination of the steady-state system and limit analysis of dose-response curves.

pub mod elimination;
pub mod joint;
pub mod limits;
pub mod newton;
pub mod poly;
pub mod univariate;

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::conservation::LawSet;
use crate::model::ReactionNetwork;
use crate::rational::Q;
pub use elimination::{find_parametrization, steady_state_equations, Eliminator, SteadyStateParametrization};
pub use limits::{analyze_roots, certified_limit, certify_candidates, propagate_limits, CertifiedLimit, LimitValue, RootReport};
use poly::{vars, RationalPoly, Vars};
use univariate::UniPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("no rational parametrization found")]
    NotFound,
    #[error("elimination unsupported: {0}")]
    Unsupported(String),
    #[error("intermediate polynomial too large")]
    TooLarge,
    #[error("elimination polynomial vanishes identically after specialization")]
    SpuriousElimination,
    #[error("no relation constrains the output species")]
    NoRelation,
}

/// Which route produced an elimination polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElimPath {
    Parametrization,
    FullSystem,
}

/// Elimination result for one output species, before choosing an input.
#[derive(Clone, Debug)]
pub struct OutputRelation {
    pub output_index: usize,
    /// Polynomial in `(x, T1, ..., Tm)`.
    pub poly: RationalPoly,
    /// Further relations from the other path or leftover polynomials.
    pub auxiliary: Vec<RationalPoly>,
    pub path: ElimPath,
}

/// `P(x, λ)` for an (input, output) pair.
#[derive(Clone, Debug)]
pub struct ElimPolynomial {
    pub output_index: usize,
    pub input_index: usize,
    pub poly: RationalPoly,
    pub specialized: RationalPoly,
    pub m_deg: u32,
    pub q: UniPoly,
    pub lambda_dependent: bool,
    /// Factor of `specialized` that depends on `x` only.
    pub constant_factor: Option<UniPoly>,
    pub auxiliary: Vec<RationalPoly>,
    pub path: ElimPath,
}

impl ElimPolynomial {
    /// `|P(x, λ)|` divided by the largest monomial magnitude.
    pub fn relative_residual(&self, x: f64, lambda: f64) -> f64 {
        let (value, scale) = self.specialized.eval_f64_with_scale(&[x, lambda]);
        if scale == 0.0 {
            return value.abs();
        }
        value.abs() / scale
    }
}

/// Relation between two species on the steady-state variety.
#[derive(Clone, Debug)]
pub struct PairRelation {
    pub first: usize,
    pub second: usize,
    /// Polynomial over the species variable space.
    pub poly: RationalPoly,
}

/// Network-level symbolic data shared by every (input, output) pair.
#[derive(Clone, Debug)]
pub struct SymbolicModel {
    pub species_names: Vec<String>,
    pub species_count: usize,
    pub laws: LawSet,
    /// Species, then `T1..Tm`, then `lambda`.
    pub vars: Vars,
    pub steady_state: Vec<RationalPoly>,
    pub parametrization: Option<SteadyStateParametrization>,
    pub outputs: Vec<Result<OutputRelation, SymbolicError>>,
    pub pairs: Vec<PairRelation>,
}

impl SymbolicModel {
    pub fn build(net: &ReactionNetwork) -> Self {
        let d = net.species_count();
        let laws = LawSet::of(net);
        let m = laws.working.len();
        let mut names = net.species_names();
        names.extend((1..=m).map(|k| format!("T{k}")));
        names.push("lambda".into());
        let vars = vars(&names);
        let mut positive = vec![true; d];
        positive.extend(laws.working.iter().map(|l| l.positive));
        positive.push(true);
        let mut strippable = vec![true; d];
        strippable.extend(vec![false; m + 1]);
        let eliminator = Eliminator { vars: vars.clone(), positive, strippable, limits: Default::default() };
        let steady_state: Vec<RationalPoly> =
            steady_state_equations(net, &vars).into_iter().filter(|p| !p.is_zero()).collect();
        let parametrization = find_parametrization(&eliminator, &steady_state, d).ok();
        let law_polys: Vec<RationalPoly> = laws
            .working
            .iter()
            .enumerate()
            .map(|(k, law)| {
                let mut p = RationalPoly::variable(&vars, d + k).neg();
                for &s in &law.support {
                    p = p.add(&RationalPoly::variable(&vars, s).scale(&law.coeffs[s]));
                }
                p
            })
            .collect();
        let outputs: Vec<Result<OutputRelation, SymbolicError>> = (0..d)
            .into_par_iter()
            .map(|j| {
                output_relation(&eliminator, &steady_state, &law_polys, parametrization.as_ref(), d, m, j)
            })
            .collect();
        let pair_list: Vec<(usize, usize)> = (0..d).flat_map(|u| (u + 1..d).map(move |w| (u, w))).collect();
        let pairs: Vec<PairRelation> = pair_list
            .into_par_iter()
            .flat_map_iter(|(u, w)| {
                let eliminable: Vec<usize> = (0..d).filter(|&s| s != u && s != w).collect();
                let polys = eliminator
                    .project(steady_state.clone(), &eliminable, Vec::new())
                    .map(|e| e.polys)
                    .unwrap_or_default();
                polys
                    .into_iter()
                    .filter(move |p| p.uses_var(u) && p.uses_var(w))
                    .map(move |poly| PairRelation { first: u, second: w, poly })
            })
            .collect();
        SymbolicModel {
            species_names: net.species_names(),
            species_count: d,
            laws,
            vars,
            steady_state,
            parametrization,
            outputs,
            pairs,
        }
    }

    pub fn law_count(&self) -> usize {
        self.laws.working.len()
    }

    pub fn lambda_var(&self) -> usize {
        self.species_count + self.law_count()
    }

    /// Conservation relations with `T_k = C_k + α_i^{(k)} λ`, over the species-plus-λ space.
    pub fn shifted_laws(&self, base_totals: &[Q], input: usize) -> Vec<RationalPoly> {
        self.laws
            .working
            .iter()
            .enumerate()
            .map(|(k, law)| {
                let mut p = RationalPoly::constant(&self.vars, -base_totals[k].clone());
                let shift = &law.coeffs[input];
                if !shift.is_zero() {
                    p = p.sub(&RationalPoly::variable(&self.vars, self.lambda_var()).scale(shift));
                }
                for &s in &law.support {
                    p = p.add(&RationalPoly::variable(&self.vars, s).scale(&law.coeffs[s]));
                }
                p
            })
            .collect()
    }

    pub fn specialize(&self, output: usize, input: usize, base_totals: &[Q]) -> Result<ElimPolynomial, SymbolicError> {
        let rel = self.outputs[output].as_ref().map_err(Clone::clone)?;
        specialize_input(rel, &self.laws, base_totals, input)
    }
}

fn output_relation(
    eliminator: &Eliminator,
    steady_state: &[RationalPoly],
    law_polys: &[RationalPoly],
    param: Option<&SteadyStateParametrization>,
    d: usize,
    m: usize,
    j: usize,
) -> Result<OutputRelation, SymbolicError> {
    let keep_ok = |p: &RationalPoly| p.uses_var(j) && p.used_vars().iter().all(|&v| v == j || (d..d + m).contains(&v));
    let mut candidates: Vec<(ElimPath, RationalPoly)> = Vec::new();
    if let Some(param) = param {
        if let Ok(polys) = via_parametrization(eliminator, law_polys, param, j) {
            candidates.extend(polys.into_iter().filter(|p| keep_ok(p)).map(|p| (ElimPath::Parametrization, p)));
        }
    }
    let mut system: Vec<RationalPoly> = steady_state.to_vec();
    system.extend(law_polys.iter().cloned());
    let eliminable: Vec<usize> = (0..d).filter(|&s| s != j).collect();
    let full = eliminator.project(system, &eliminable, Vec::new());
    if let Ok(e) = &full {
        for p in &e.polys {
            if keep_ok(p) && !candidates.iter().any(|(_, c)| c == p) {
                candidates.push((ElimPath::FullSystem, p.clone()));
            }
        }
    }
    if candidates.is_empty() {
        return Err(match full {
            Err(e) => e,
            Ok(_) => SymbolicError::NoRelation,
        });
    }
    candidates.sort_by_key(|(_, p)| (p.degree_in(j), p.total_degree(), p.len()));
    let mut mapping = vec![None; eliminator.vars.len()];
    mapping[j] = Some(0);
    let mut names = vec!["x".to_string()];
    for k in 0..m {
        mapping[d + k] = Some(1 + k);
        names.push(format!("T{}", k + 1));
    }
    let target = vars(&names);
    let mut iter = candidates.into_iter().map(|(path, p)| (path, p.remap(&target, &mapping)));
    let (path, poly) = iter.next().expect("nonempty");
    Ok(OutputRelation { output_index: j, poly, auxiliary: iter.map(|(_, p)| p).collect(), path })
}

fn via_parametrization(
    eliminator: &Eliminator,
    law_polys: &[RationalPoly],
    param: &SteadyStateParametrization,
    j: usize,
) -> Result<Vec<RationalPoly>, SymbolicError> {
    let mut polys: Vec<RationalPoly> = law_polys.iter().map(|l| param.apply(l)).collect();
    let mut nonvanishing: Vec<RationalPoly> = Vec::new();
    for (_, den) in param.solved.values() {
        if !den.is_constant() && den.coefficient_sign().is_some() {
            nonvanishing.push(den.primitive());
        }
    }
    let mut eliminable: Vec<usize> = param.free.iter().copied().filter(|&f| f != j).collect();
    if let Some((num, den)) = param.solved.get(&j) {
        // x_j * den - num = 0 ties the output to the free species.
        let xj = RationalPoly::variable(&eliminator.vars, j);
        polys.push(xj.mul(den).sub(num));
        eliminable = param.free.clone();
    }
    eliminator.project(polys, &eliminable, nonvanishing).map(|e| e.polys)
}

/// Gcd of the coefficients of `p` seen as a polynomial in `outer`, each coefficient univariate in `inner`.
fn univariate_content(p: &RationalPoly, outer: usize, inner: usize) -> UniPoly {
    let mut g = UniPoly::zero();
    for c in p.coeffs_in(outer) {
        if c.is_zero() {
            continue;
        }
        g = UniPoly::gcd(&g, &c.to_univariate(inner));
        if g.degree() == Some(0) {
            break;
        }
    }
    g
}

/// Substitutes `T_k = C_k + α_i^{(k)} λ` and extracts the leading λ coefficient.
pub fn specialize_input(
    rel: &OutputRelation,
    laws: &LawSet,
    base_totals: &[Q],
    input: usize,
) -> Result<ElimPolynomial, SymbolicError> {
    let m = laws.working.len();
    let xl = vars(&["x", "lambda"]);
    let specialize_one = |p: &RationalPoly| -> RationalPoly {
        let mut names = vec!["x".to_string(), "lambda".to_string()];
        names.extend((1..=m).map(|k| format!("T{k}")));
        let wide = vars(&names);
        let mut mapping = vec![Some(0)];
        mapping.extend((0..m).map(|k| Some(2 + k)));
        let mut w = p.remap(&wide, &mapping);
        let lambda = RationalPoly::variable(&wide, 1);
        for (k, law) in laws.working.iter().enumerate() {
            let shifted =
                RationalPoly::constant(&wide, base_totals[k].clone()).add(&lambda.scale(&law.coeffs[input]));
            w = w.substitute(2 + k, &shifted);
        }
        let mut back = vec![Some(0), Some(1)];
        back.extend(vec![None; m]);
        let s = w.remap(&xl, &back);
        let content = s.monomial_content();
        s.div_monomial(&content)
    };
    let mut specialized = specialize_one(&rel.poly);
    if specialized.is_zero() {
        return Err(SymbolicError::SpuriousElimination);
    }
    let lambda_content = univariate_content(&specialized, 0, 1);
    if lambda_content.degree().unwrap_or(0) > 0 {
        let divisor = RationalPoly::from_univariate(&xl, 1, &lambda_content);
        if let Some(qt) = specialized.exact_div(&divisor) {
            specialized = qt;
        }
    }
    specialized = specialized.primitive();
    let x_content = univariate_content(&specialized, 1, 0);
    let constant_factor = (x_content.degree().unwrap_or(0) > 0 && specialized.uses_var(1)).then_some(x_content);
    let m_deg = specialized.degree_in(1);
    let q = specialized.coeffs_in(1).pop().expect("nonzero").to_univariate(0);
    let auxiliary = rel
        .auxiliary
        .iter()
        .map(specialize_one)
        .filter(|p| !p.is_zero() && p.uses_var(0))
        .map(|p| p.primitive())
        .collect();
    Ok(ElimPolynomial {
        output_index: rel.output_index,
        input_index: input,
        poly: rel.poly.clone(),
        specialized,
        m_deg,
        q,
        lambda_dependent: m_deg >= 1,
        constant_factor,
        auxiliary,
        path: rel.path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conservation::totals;
    use crate::fixtures;
    use crate::rational::{q, q_frac};

    fn base(net: &ReactionNetwork, model: &SymbolicModel) -> Vec<Q> {
        let x0 = vec![q(1); net.species_count()];
        totals(&model.laws.working, &x0).values
    }

    #[test]
    fn modified_archetypal_q() {
        let net = fixtures::archetypal_mod();
        let model = SymbolicModel::build(&net);
        let c = base(&net, &model);
        let e = model.specialize(0, 0, &c).unwrap();
        assert_eq!(e.q.render("x"), "-x + 1");
        assert_eq!(e.m_deg, 1);
        assert!(e.lambda_dependent);
        let r = analyze_roots(&e.q);
        assert_eq!(r.nonneg_roots.len(), 1);
        assert_eq!(r.nonneg_roots[0].as_rational(), Some(&q(1)));
    }

    #[test]
    fn archetypal_is_constant() {
        let net = fixtures::archetypal();
        let model = SymbolicModel::build(&net);
        let c = base(&net, &model);
        let e = model.specialize(0, 1, &c).unwrap();
        assert!(!e.lambda_dependent);
        assert_eq!(analyze_roots(&e.q).nonneg_roots[0].as_rational(), Some(&q_frac(1, 2)));
    }

    #[test]
    fn envz_xpy_leading_coefficients() {
        let net = fixtures::envz_ompr();
        let model = SymbolicModel::build(&net);
        let c = base(&net, &model);
        let xpy = net.species_index("XPY").unwrap();
        // Input X shifts T1 only: q = -(T2 - c - d x) up to scaling, with T2 = 4, c = 2, d = 2.
        let e = model.specialize(xpy, 0, &c).unwrap();
        assert_eq!(e.m_deg, 1);
        assert_eq!(analyze_roots(&e.q).nonneg_roots[0].as_rational(), Some(&q(1)));
        // Input XPY shifts both totals: q is a nonzero constant and m = 2.
        let e = model.specialize(xpy, xpy, &c).unwrap();
        assert_eq!(e.m_deg, 2);
        assert_eq!(e.q.degree(), Some(0));
        // YP does not depend on the totals.
        let yp = net.species_index("YP").unwrap();
        let e = model.specialize(yp, 0, &c).unwrap();
        assert!(!e.lambda_dependent);
        assert_eq!(e.q.render("x"), "x - 2");
    }
}
