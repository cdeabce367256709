//! Joint consistency of limit candidates across all species for one input.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::limits::{limit_candidates, push_unique, LimitValue};
use super::newton::{branches, ParamLimit};
use super::poly::{vars, Monomial, RationalPoly};
use super::{ElimPolynomial, SymbolicError, SymbolicModel};
use crate::linalg::QMatrix;
use crate::rational::Q;

/// Backtracking budget in visited nodes.
const SEARCH_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct RowAnalysis {
    pub input: usize,
    pub elims: Vec<Result<ElimPolynomial, SymbolicError>>,
    /// Per-species candidates from its own elimination polynomial; `None` when unknown.
    pub candidates: Vec<Option<Vec<LimitValue>>>,
    /// Values that occur in some jointly consistent assignment.
    pub joint: Vec<Option<Vec<LimitValue>>>,
    pub consistent_assignments: usize,
    /// False when the search found nothing or ran out of budget; `joint` then equals `candidates`.
    pub pruned: bool,
}

struct Relation {
    poly: RationalPoly,
    /// Largest species index used; the relation is checked once it is assigned.
    last: usize,
}

fn rref_relations(polys: &[RationalPoly], reverse: bool) -> Vec<RationalPoly> {
    let Some(first) = polys.first() else { return Vec::new() };
    let vs = first.vars().clone();
    let mut monos: Vec<Monomial> = polys.iter().flat_map(|p| p.terms().map(|(m, _)| m.clone())).collect();
    monos.sort();
    monos.dedup();
    if !reverse {
        monos.reverse();
    }
    let rows: Vec<Vec<Q>> = polys
        .iter()
        .map(|p| {
            let terms: std::collections::BTreeMap<&Monomial, &Q> = p.terms().collect();
            monos.iter().map(|m| terms.get(m).map_or_else(Q::zero, |c| (*c).clone())).collect()
        })
        .collect();
    let mut mat = QMatrix::from_rows(&rows);
    mat.rref();
    (0..mat.rows)
        .map(|r| RationalPoly::from_terms(&vs, monos.iter().enumerate().map(|(c, m)| (m.0.clone(), mat.get(r, c).clone()))))
        .filter(|p| !p.is_zero())
        .collect()
}

/// Whether `p` can vanish asymptotically under the assignment; `values[v] = None` marks an unknown variable.
fn relation_consistent(p: &RationalPoly, values: &[Option<&LimitValue>], lambda: usize) -> bool {
    let mut has_inf = false;
    let mut inf_signs = (false, false);
    let mut exact = true;
    let mut lo = Q::zero();
    let mut hi = Q::zero();
    for (m, c) in p.terms() {
        let mut unknown = false;
        let (mut tlo, mut thi) = (Q::one(), Q::one());
        let (mut zero, mut inf) = (false, false);
        for (v, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if v == lambda {
                inf = true;
                continue;
            }
            match values.get(v).copied().flatten() {
                None => unknown = true,
                Some(LimitValue::Zero) => zero = true,
                Some(LimitValue::Infinity) => inf = true,
                Some(LimitValue::Finite(r)) => {
                    let (a, b) = r.bounds();
                    exact &= r.is_rational();
                    for _ in 0..e {
                        tlo *= &a;
                        thi *= &b;
                    }
                }
            }
        }
        if unknown || (zero && inf) {
            return true;
        }
        if inf {
            has_inf = true;
            if c.is_positive() {
                inf_signs.0 = true;
            } else {
                inf_signs.1 = true;
            }
        } else if !zero {
            if c.is_positive() {
                lo += c * &tlo;
                hi += c * &thi;
            } else {
                lo += c * &thi;
                hi += c * &tlo;
            }
        }
    }
    if has_inf {
        return inf_signs.0 && inf_signs.1;
    }
    if exact {
        lo.is_zero()
    } else {
        !lo.is_positive() && !hi.is_negative()
    }
}

fn limit_matches(value: &LimitValue, b: &super::newton::Branches) -> bool {
    match value {
        LimitValue::Zero => b.to_zero,
        LimitValue::Infinity => b.to_infinity,
        LimitValue::Finite(r) => b.finite.iter().any(|f| f.exact_eq(r)),
    }
}

struct PairCheck {
    first: usize,
    second: usize,
    /// Relation over `(first, second)`.
    poly: RationalPoly,
}

impl PairCheck {
    fn ok(&self, a: &LimitValue, b: &LimitValue) -> bool {
        let param = |v: &LimitValue| match v {
            LimitValue::Zero => Some(ParamLimit::Zero),
            LimitValue::Infinity => Some(ParamLimit::Infinity),
            LimitValue::Finite(_) => None,
        };
        if let Some(limit) = param(b) {
            return limit_matches(a, &branches(&self.poly, 0, 1, limit));
        }
        if let Some(limit) = param(a) {
            return limit_matches(b, &branches(&self.poly, 1, 0, limit));
        }
        relation_consistent(&self.poly, &[Some(a), Some(b)], usize::MAX)
    }
}

fn refine_all(values: &mut [Option<Vec<LimitValue>>]) {
    let width = Q::new(BigInt::one(), BigInt::from(2).pow(90));
    for set in values.iter_mut().flatten() {
        for v in set.iter_mut() {
            if let LimitValue::Finite(r) = v {
                r.refine(&width);
            }
        }
    }
}

/// Limit candidates of every output for `input`, pruned by joint consistency.
pub fn analyze_row(model: &SymbolicModel, base_totals: &[Q], input: usize) -> RowAnalysis {
    let d = model.species_count;
    let elims: Vec<Result<ElimPolynomial, SymbolicError>> =
        (0..d).map(|j| model.specialize(j, input, base_totals)).collect();
    let mut candidates: Vec<Option<Vec<LimitValue>>> = elims
        .iter()
        .enumerate()
        .map(|(j, e)| {
            e.as_ref().ok().map(|e| limit_candidates(e, model.laws.bounds_species_against(input, j)))
        })
        .collect();
    refine_all(&mut candidates);

    let lambda = model.lambda_var();
    let mut base: Vec<RationalPoly> = model.steady_state.clone();
    base.extend(model.shifted_laws(base_totals, input));
    let mut polys = base.clone();
    polys.extend(rref_relations(&base, false));
    polys.extend(rref_relations(&base, true));
    let relations: Vec<Relation> = polys
        .into_iter()
        .filter_map(|poly| {
            let last = poly.used_vars().into_iter().filter(|&v| v < d).max()?;
            Some(Relation { poly, last })
        })
        .collect();
    let uv = vars(&["u", "w"]);
    let pair_checks: Vec<PairCheck> = model
        .pairs
        .iter()
        .map(|p| {
            let mut map = vec![None; p.poly.nvars()];
            map[p.first] = Some(0);
            map[p.second] = Some(1);
            PairCheck { first: p.first, second: p.second, poly: p.poly.remap(&uv, &map) }
        })
        .collect();

    let mut search = Search {
        candidates: &candidates,
        relations: &relations,
        pairs: &pair_checks,
        lambda,
        assignment: vec![None; d],
        found: vec![Vec::new(); d],
        count: 0,
        visited: 0,
        exhausted: false,
    };
    search.run(0);
    let (count, exhausted, found) = (search.count, search.exhausted, search.found);
    let pruned = count > 0 && !exhausted;
    let joint = if pruned {
        candidates
            .iter()
            .zip(found)
            .map(|(c, f)| c.as_ref().map(|_| f))
            .collect()
    } else {
        candidates.clone()
    };
    RowAnalysis { input, elims, candidates, joint, consistent_assignments: count, pruned }
}

struct Search<'a> {
    candidates: &'a [Option<Vec<LimitValue>>],
    relations: &'a [Relation],
    pairs: &'a [PairCheck],
    lambda: usize,
    assignment: Vec<Option<LimitValue>>,
    found: Vec<Vec<LimitValue>>,
    count: usize,
    visited: usize,
    exhausted: bool,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) {
        if self.exhausted {
            return;
        }
        self.visited += 1;
        if self.visited > SEARCH_BUDGET {
            self.exhausted = true;
            return;
        }
        if depth == self.assignment.len() {
            self.count += 1;
            for (set, v) in self.found.iter_mut().zip(&self.assignment) {
                if let Some(v) = v {
                    push_unique(set, v.clone());
                }
            }
            return;
        }
        let options: Vec<Option<LimitValue>> = match &self.candidates[depth] {
            Some(c) => c.iter().cloned().map(Some).collect(),
            None => vec![None],
        };
        for value in options {
            self.assignment[depth] = value;
            if self.consistent_at(depth) {
                self.run(depth + 1);
            }
        }
        self.assignment[depth] = None;
    }

    fn consistent_at(&self, depth: usize) -> bool {
        let view: Vec<Option<&LimitValue>> = self.assignment.iter().map(Option::as_ref).collect();
        let rel_ok = self
            .relations
            .iter()
            .filter(|r| r.last == depth)
            .all(|r| relation_consistent(&r.poly, &view, self.lambda));
        rel_ok
            && self.pairs.iter().filter(|p| p.first.max(p.second) == depth).all(|p| {
                match (&self.assignment[p.first], &self.assignment[p.second]) {
                    (Some(a), Some(b)) => p.ok(a, b),
                    _ => true,
                }
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conservation::totals;
    use crate::fixtures;
    use crate::rational::{q, q_frac};
    use crate::symbolic::univariate::RealAlgebraic;

    fn row(net: &crate::model::ReactionNetwork, x0: &[i64], input: &str) -> (SymbolicModel, RowAnalysis) {
        let model = SymbolicModel::build(net);
        let x: Vec<Q> = x0.iter().map(|&v| q(v)).collect();
        let c = totals(&model.laws.working, &x).values;
        let r = analyze_row(&model, &c, net.species_index(input).unwrap());
        (model, r)
    }

    fn single(r: &RowAnalysis, j: usize) -> LimitValue {
        let set = r.joint[j].as_ref().expect("known");
        assert_eq!(set.len(), 1, "species {j}: {:?}", set.iter().map(ToString::to_string).collect::<Vec<_>>());
        set[0].clone()
    }

    fn is_value(v: &LimitValue, expected: &Q) -> bool {
        matches!(v, LimitValue::Finite(r) if r.exact_eq(&RealAlgebraic::Rational(expected.clone())))
    }

    #[test]
    fn modified_archetypal_rules_out_growth() {
        let (_, r) = row(&fixtures::archetypal_mod(), &[1, 1], "X");
        assert!(is_value(&single(&r, 0), &q(1)));
        assert!(matches!(single(&r, 1), LimitValue::Infinity));
    }

    #[test]
    fn envz_row_x() {
        let net = fixtures::envz_ompr();
        let (_, r) = row(&net, &[1; 7], "X");
        let get = |n: &str| single(&r, net.species_index(n).unwrap());
        assert!(is_value(&get("X"), &q(2)));
        assert!(is_value(&get("XT"), &q(1)));
        assert!(matches!(get("XP"), LimitValue::Infinity));
        assert!(matches!(get("Y"), LimitValue::Zero));
        assert!(is_value(&get("YP"), &q(2)));
        assert!(is_value(&get("XPY"), &q(1)));
        assert!(is_value(&get("XTYP"), &q(1)));
    }

    #[test]
    fn envz_row_xpy() {
        let net = fixtures::envz_ompr();
        let (_, r) = row(&net, &[1; 7], "XPY");
        let get = |n: &str| single(&r, net.species_index(n).unwrap());
        assert!(is_value(&get("XP"), &q_frac(2, 3)));
        assert!(is_value(&get("YP"), &q(2)));
        for n in ["X", "XT", "Y", "XPY", "XTYP"] {
            assert!(matches!(get(n), LimitValue::Infinity), "{n}");
        }
    }

    #[test]
    fn futile_regime_one() {
        let net = fixtures::futile_cycle();
        let (_, r) = row(&net, &[1, 1, 1, 2, 1, 1], "S");
        let get = |n: &str| single(&r, net.species_index(n).unwrap());
        assert!(matches!(get("S"), LimitValue::Infinity));
        assert!(is_value(&get("P"), &q(4)));
        assert!(matches!(get("E"), LimitValue::Zero));
        assert!(is_value(&get("F"), &q(1)));
        assert!(is_value(&get("SE"), &q(2)));
    }
}
