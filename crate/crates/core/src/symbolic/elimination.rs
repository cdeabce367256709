//! Elimination of species from the steady-state system by linear substitution, with resultants as fallback.

use std::collections::BTreeMap;

use num_traits::One;

use super::poly::{resultant, Monomial, RationalPoly, Vars};
use super::SymbolicError;
use crate::model::ReactionNetwork;
use crate::rational::{q, Q};

/// Steady-state polynomials `f_k = Σ κ_r (ν'_r - ν_r)_k x^{ν_r}` over `vars` (species first).
pub fn steady_state_equations(net: &ReactionNetwork, vars: &Vars) -> Vec<RationalPoly> {
    let d = net.species_count();
    assert!(vars.len() >= d);
    let mut eqs = vec![RationalPoly::zero(vars); d];
    for (reaction, k) in net.reactions().iter().zip(net.rate_values()) {
        let mut exps = vec![0u32; vars.len()];
        exps[..d].copy_from_slice(&reaction.reactant.0);
        for (s, eq) in eqs.iter_mut().enumerate() {
            let delta = reaction.product.0[s] as i64 - reaction.reactant.0[s] as i64;
            if delta != 0 {
                *eq = eq.add(&RationalPoly::term(vars, exps.clone(), k * q(delta)));
            }
        }
    }
    eqs
}

#[derive(Clone, Debug)]
pub struct EliminationLimits {
    pub max_terms: usize,
    pub max_steps: usize,
    pub max_resultants: usize,
}

impl Default for EliminationLimits {
    fn default() -> Self {
        EliminationLimits { max_terms: 4000, max_steps: 64, max_resultants: 4 }
    }
}

#[derive(Clone, Debug)]
pub enum Step {
    /// `coefficient * var + rest = 0` solved for `var`.
    Substitute { var: usize, coefficient: RationalPoly, rest: RationalPoly },
    Drop { var: usize },
    Resultant { var: usize },
}

#[derive(Clone, Debug)]
pub struct Elimination {
    pub polys: Vec<RationalPoly>,
    pub steps: Vec<Step>,
    /// Monomial factors divided out (boundary components such as `Y = 0`).
    pub boundary_factors: Vec<Monomial>,
    pub resultants_used: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Project,
    Parametrize,
}

/// Variable roles shared by every elimination over one variable space.
#[derive(Clone, Debug)]
pub struct Eliminator {
    pub vars: Vars,
    /// Variables known to be positive on the region of interest.
    pub positive: Vec<bool>,
    /// Variables whose monomial factors may be divided out.
    pub strippable: Vec<bool>,
    pub limits: EliminationLimits,
}

impl Eliminator {
    fn sign_definite(&self, a: &RationalPoly) -> bool {
        a.coefficient_sign().is_some() && a.used_vars().iter().all(|&v| self.positive[v])
    }

    fn normalize(&self, p: &RationalPoly, nonvanishing: &[RationalPoly], boundary: &mut Vec<Monomial>) -> RationalPoly {
        if p.is_zero() {
            return p.clone();
        }
        let content = p.monomial_content();
        let strip = Monomial(
            content.0.iter().enumerate().map(|(v, &e)| if self.strippable[v] { e } else { 0 }).collect(),
        );
        let mut out = if strip.degree() > 0 {
            if !boundary.contains(&strip) {
                boundary.push(strip.clone());
            }
            p.div_monomial(&strip)
        } else {
            p.clone()
        };
        let mut changed = true;
        while changed {
            changed = false;
            for a in nonvanishing {
                if a.is_constant() || a.len() > out.len() {
                    continue;
                }
                if let Some(quot) = out.exact_div(a) {
                    if !quot.is_zero() {
                        out = quot;
                        changed = true;
                    }
                }
            }
        }
        if out.is_constant() && !out.is_zero() {
            return RationalPoly::constant(&self.vars, Q::one());
        }
        out.primitive()
    }

    fn dedup(polys: Vec<RationalPoly>) -> Vec<RationalPoly> {
        let mut out: Vec<RationalPoly> = Vec::new();
        for p in polys {
            if !p.is_zero() && !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Eliminates every variable in `eliminable`.
    pub fn project(
        &self,
        polys: Vec<RationalPoly>,
        eliminable: &[usize],
        nonvanishing: Vec<RationalPoly>,
    ) -> Result<Elimination, SymbolicError> {
        self.run(polys, eliminable, nonvanishing, Mode::Project)
    }

    fn run(
        &self,
        polys: Vec<RationalPoly>,
        eliminable: &[usize],
        mut nonvanishing: Vec<RationalPoly>,
        mode: Mode,
    ) -> Result<Elimination, SymbolicError> {
        let mut boundary = Vec::new();
        let mut polys: Vec<RationalPoly> =
            Self::dedup(polys.iter().map(|p| self.normalize(p, &nonvanishing, &mut boundary)).collect());
        let mut steps = Vec::new();
        let mut resultants_used = 0;
        for _ in 0..=self.limits.max_steps + eliminable.len() * 2 {
            polys = Self::dedup(polys);
            if polys.iter().any(|p| p.len() > self.limits.max_terms) {
                return Err(SymbolicError::TooLarge);
            }
            let present: Vec<usize> =
                eliminable.iter().copied().filter(|&v| polys.iter().any(|p| p.uses_var(v))).collect();
            if present.is_empty() {
                return Ok(Elimination { polys, steps, boundary_factors: boundary, resultants_used });
            }
            if mode == Mode::Project {
                let single = present.iter().copied().find(|&v| polys.iter().filter(|p| p.uses_var(v)).count() == 1);
                if let Some(v) = single {
                    polys.retain(|p| !p.uses_var(v));
                    steps.push(Step::Drop { var: v });
                    continue;
                }
            }
            if let Some((v, idx, a, b)) = self.best_linear(&polys, &present) {
                let pivot = polys.remove(idx);
                debug_assert!(pivot.degree_in(v) == 1);
                let num = b.neg();
                let mut next = Vec::with_capacity(polys.len());
                for o in &polys {
                    if o.uses_var(v) {
                        next.push(o.substitute_fraction(v, &num, &a));
                    } else {
                        next.push(o.clone());
                    }
                }
                nonvanishing = nonvanishing
                    .iter()
                    .map(|f| if f.uses_var(v) { f.substitute_fraction(v, &num, &a) } else { f.clone() })
                    .map(|f| f.primitive())
                    .collect();
                if !a.is_constant() && self.sign_definite(&a) {
                    nonvanishing.push(a.primitive());
                }
                polys = next.iter().map(|p| self.normalize(p, &nonvanishing, &mut boundary)).collect();
                steps.push(Step::Substitute { var: v, coefficient: a, rest: b });
                continue;
            }
            if mode == Mode::Parametrize {
                return Ok(Elimination { polys, steps, boundary_factors: boundary, resultants_used });
            }
            if resultants_used >= self.limits.max_resultants {
                return Err(SymbolicError::Unsupported("resultant budget exhausted".into()));
            }
            let v = *present
                .iter()
                .min_by_key(|&&v| polys.iter().map(|p| p.degree_in(v)).max().unwrap_or(0))
                .expect("nonempty");
            let idx = (0..polys.len())
                .filter(|&i| polys[i].uses_var(v))
                .min_by_key(|&i| (polys[i].degree_in(v), polys[i].len()))
                .expect("variable present");
            let pivot = polys.remove(idx);
            let mut next = Vec::with_capacity(polys.len());
            for o in &polys {
                if o.uses_var(v) {
                    let r = resultant(&pivot, o, v).ok_or_else(|| SymbolicError::Unsupported("resultant failed".into()))?;
                    next.push(self.normalize(&r, &nonvanishing, &mut boundary));
                } else {
                    next.push(o.clone());
                }
            }
            polys = next;
            resultants_used += 1;
            steps.push(Step::Resultant { var: v });
        }
        Err(SymbolicError::Unsupported("elimination step limit reached".into()))
    }

    /// Picks the polynomial linear in some variable with the most benign coefficient.
    fn best_linear(
        &self,
        polys: &[RationalPoly],
        present: &[usize],
    ) -> Option<(usize, usize, RationalPoly, RationalPoly)> {
        let mut best: Option<((u8, usize, u32), usize, usize, RationalPoly, RationalPoly)> = None;
        for &v in present {
            for (i, p) in polys.iter().enumerate() {
                if p.degree_in(v) != 1 {
                    continue;
                }
                let mut coeffs = p.coeffs_in(v);
                let a = coeffs.pop().expect("degree one");
                let b = coeffs.pop().expect("degree one");
                let class = if a.is_constant() {
                    0
                } else if a.len() == 1 && self.sign_definite(&a) {
                    1
                } else if self.sign_definite(&a) {
                    2
                } else {
                    3
                };
                let score = (class, b.len(), p.total_degree());
                if best.as_ref().is_none_or(|(s, ..)| score < *s) {
                    best = Some((score, v, i, a, b));
                }
            }
        }
        best.map(|(_, v, i, a, b)| (v, i, a, b))
    }
}

/// Rational expressions for solved species in terms of the free ones.
#[derive(Clone, Debug)]
pub struct SteadyStateParametrization {
    pub vars: Vars,
    pub solved: BTreeMap<usize, (RationalPoly, RationalPoly)>,
    pub free: Vec<usize>,
    /// Monomial factors that were divided out; each marks a boundary component.
    pub boundary_factors: Vec<Monomial>,
}

impl SteadyStateParametrization {
    /// Substitutes every solved species into `p`, clearing denominators.
    pub fn apply(&self, p: &RationalPoly) -> RationalPoly {
        let mut out = p.clone();
        for (&v, (num, den)) in &self.solved {
            if out.uses_var(v) {
                out = out.substitute_fraction(v, num, den);
            }
        }
        out
    }

    pub fn render(&self, names: &[String]) -> Vec<String> {
        let mut lines = Vec::new();
        for (&v, (num, den)) in &self.solved {
            if den.constant_value().is_some_and(|c| c.is_one()) {
                lines.push(format!("{} = {}", names[v], num));
            } else {
                lines.push(format!("{} = ({}) / ({})", names[v], num, den));
            }
        }
        lines
    }
}

fn substitute_with_degree(p: &RationalPoly, v: usize, num: &RationalPoly, den: &RationalPoly, deg: u32) -> RationalPoly {
    let own = p.degree_in(v);
    let cleared = if own == 0 { p.clone() } else { p.substitute_fraction(v, num, den) };
    if deg > own {
        cleared.mul(&den.pow(deg - own))
    } else {
        cleared
    }
}

fn simplify_fraction(num: RationalPoly, den: RationalPoly) -> (RationalPoly, RationalPoly) {
    if num.is_zero() {
        return (num, RationalPoly::constant(den.vars(), Q::one()));
    }
    let cn = num.monomial_content();
    let cd = den.monomial_content();
    let common = Monomial(cn.0.iter().zip(&cd.0).map(|(a, b)| *a.min(b)).collect());
    let (mut num, mut den) = (num.div_monomial(&common), den.div_monomial(&common));
    if let Some(qt) = num.exact_div(&den) {
        return (qt, RationalPoly::constant(den.vars(), Q::one()));
    }
    if let Some(c) = den.constant_value() {
        return (num.scale(&c.recip()), RationalPoly::constant(den.vars(), Q::one()));
    }
    let lead = den.leading_term().map(|(_, c)| c.clone()).unwrap_or_else(Q::one);
    num = num.scale(&lead.recip());
    den = den.scale(&lead.recip());
    (num, den)
}

/// Solves the steady-state equations for as many species as possible by linear substitutions.
pub fn find_parametrization(
    eliminator: &Eliminator,
    eqs: &[RationalPoly],
    species_count: usize,
) -> Result<SteadyStateParametrization, SymbolicError> {
    let species: Vec<usize> = (0..species_count).collect();
    let result = eliminator.run(eqs.to_vec(), &species, Vec::new(), Mode::Parametrize)?;
    if !result.polys.is_empty() {
        return Err(SymbolicError::NotFound);
    }
    let vars = eliminator.vars.clone();
    let mut solved: BTreeMap<usize, (RationalPoly, RationalPoly)> = BTreeMap::new();
    for step in result.steps.iter().rev() {
        let Step::Substitute { var, coefficient, rest } = step else { continue };
        let mut a = coefficient.clone();
        let mut b = rest.clone();
        for (&w, (nw, dw)) in &solved {
            let deg = a.degree_in(w).max(b.degree_in(w));
            if deg == 0 {
                continue;
            }
            a = substitute_with_degree(&a, w, nw, dw, deg);
            b = substitute_with_degree(&b, w, nw, dw, deg);
        }
        if a.is_zero() {
            return Err(SymbolicError::NotFound);
        }
        solved.insert(*var, simplify_fraction(b.neg(), a));
    }
    let free: Vec<usize> = species.iter().copied().filter(|v| !solved.contains_key(v)).collect();
    let param = SteadyStateParametrization { vars, solved, free, boundary_factors: result.boundary_factors };
    for eq in eqs {
        if !eliminator.normalize(&param.apply(eq), &[], &mut Vec::new()).is_zero() {
            return Err(SymbolicError::NotFound);
        }
    }
    Ok(param)
}
