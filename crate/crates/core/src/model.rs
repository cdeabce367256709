//! Reaction networks and their mass-action vector fields.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::QMatrix;
use crate::rational::{format_rational, q, to_f64, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate species name `{0}`")]
    DuplicateSpecies(String),
    #[error("complex has length {found}, expected {expected}")]
    ComplexLength { expected: usize, found: usize },
    #[error("reaction {0} has identical reactant and product")]
    TrivialReaction(usize),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("rate constant of reaction {0} is not positive")]
    NonPositiveRate(usize),
    #[error("parameter `{0}` is not defined")]
    UnresolvedParameter(String),
    #[error("parameter `{0}` is not positive")]
    NonPositiveParameter(String),
    #[error("concentration vector has length {found}, expected {expected}")]
    StateLength { expected: usize, found: usize },
    #[error("negative concentration {value} for species `{species}`")]
    NegativeConcentration { species: String, value: f64 },
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("malformed assignment `{0}`; expected NAME=VALUE")]
    InvalidAssignment(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Species {
    pub name: String,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Complex(pub Vec<u32>);

impl Complex {
    pub fn zero(d: usize) -> Self {
        Complex(vec![0; d])
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn render(&self, species: &[Species]) -> String {
        if self.is_empty() {
            return "0".to_string();
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .zip(species)
            .filter(|(c, _)| **c > 0)
            .map(|(&c, s)| if c == 1 { s.name.clone() } else { format!("{c} {}", s.name) })
            .collect();
        terms.join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RateConstant {
    Value(Q),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reaction {
    pub reactant: Complex,
    pub product: Complex,
    pub rate_constant: RateConstant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    parameters: BTreeMap<String, Q>,
    rates: Vec<Q>,
    rates_f64: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoichiometricMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<i64>,
}

impl StoichiometricMatrix {
    pub fn get(&self, species: usize, reaction: usize) -> i64 {
        self.entries[species * self.cols + reaction]
    }

    pub fn column(&self, reaction: usize) -> Vec<i64> {
        (0..self.rows).map(|s| self.get(s, reaction)).collect()
    }

    pub fn to_rational(&self) -> QMatrix {
        let rows: Vec<Vec<Q>> =
            (0..self.rows).map(|s| (0..self.cols).map(|r| q(self.get(s, r))).collect()).collect();
        if self.rows == 0 {
            return QMatrix::zeros(0, self.cols);
        }
        if self.cols == 0 {
            return QMatrix::zeros(self.rows, 0);
        }
        QMatrix::from_rows(&rows)
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.to_rational().rank()
    }
}

impl ReactionNetwork {
    pub fn new(
        species_names: Vec<String>,
        reactions: Vec<Reaction>,
        parameters: BTreeMap<String, Q>,
    ) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for name in &species_names {
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateSpecies(name.clone()));
            }
        }
        for (name, value) in &parameters {
            if !value.is_positive() {
                return Err(ModelError::NonPositiveParameter(name.clone()));
            }
        }
        let species: Vec<Species> = species_names
            .into_iter()
            .enumerate()
            .map(|(index, name)| Species { name, index })
            .collect();
        let d = species.len();
        let mut edges = HashSet::new();
        let mut rates = Vec::with_capacity(reactions.len());
        for (idx, reaction) in reactions.iter().enumerate() {
            for c in [&reaction.reactant, &reaction.product] {
                if c.0.len() != d {
                    return Err(ModelError::ComplexLength { expected: d, found: c.0.len() });
                }
            }
            if reaction.reactant == reaction.product {
                return Err(ModelError::TrivialReaction(idx));
            }
            if !edges.insert((reaction.reactant.clone(), reaction.product.clone())) {
                return Err(ModelError::DuplicateEdge(format!(
                    "{} -> {}",
                    reaction.reactant.render(&species),
                    reaction.product.render(&species)
                )));
            }
            let value = match &reaction.rate_constant {
                RateConstant::Value(v) => v.clone(),
                RateConstant::Named(name) => parameters
                    .get(name)
                    .cloned()
                    .ok_or_else(|| ModelError::UnresolvedParameter(name.clone()))?,
            };
            if !value.is_positive() {
                return Err(ModelError::NonPositiveRate(idx));
            }
            rates.push(value);
        }
        let rates_f64 = rates.iter().map(to_f64).collect();
        Ok(ReactionNetwork { species, reactions, parameters, rates, rates_f64 })
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn parameters(&self) -> &BTreeMap<String, Q> {
        &self.parameters
    }

    /// Resolved rate constant of each reaction.
    pub fn rate_values(&self) -> &[Q] {
        &self.rates
    }

    pub fn rate_values_f64(&self) -> &[f64] {
        &self.rates_f64
    }

    /// New network with a reaction appended.
    pub fn with_reaction(&self, reaction: Reaction) -> Result<Self, ModelError> {
        let mut reactions = self.reactions.clone();
        reactions.push(reaction);
        ReactionNetwork::new(self.species_names(), reactions, self.parameters.clone())
    }

    /// New network with some parameter values replaced.
    pub fn with_parameters(&self, overrides: &BTreeMap<String, Q>) -> Result<Self, ModelError> {
        let mut parameters = self.parameters.clone();
        for (k, v) in overrides {
            parameters.insert(k.clone(), v.clone());
        }
        ReactionNetwork::new(self.species_names(), self.reactions.clone(), parameters)
    }

    pub fn stoichiometric_matrix(&self) -> StoichiometricMatrix {
        let d = self.species.len();
        let r = self.reactions.len();
        let mut entries = vec![0i64; d * r];
        for (j, reaction) in self.reactions.iter().enumerate() {
            for s in 0..d {
                entries[s * r + j] = reaction.product.0[s] as i64 - reaction.reactant.0[s] as i64;
            }
        }
        StoichiometricMatrix { rows: d, cols: r, entries }
    }

    fn check_state(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.species.len() {
            return Err(ModelError::StateLength { expected: self.species.len(), found: x.len() });
        }
        for (s, &v) in x.iter().enumerate() {
            if v < 0.0 || v.is_nan() {
                return Err(ModelError::NegativeConcentration {
                    species: self.species[s].name.clone(),
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Reaction fluxes `κ_r x^{ν_r}`; no sign checks.
    pub fn fluxes(&self, x: &[f64]) -> Vec<f64> {
        self.reactions
            .iter()
            .zip(&self.rates_f64)
            .map(|(reaction, &k)| {
                let mut v = k;
                for (s, &c) in reaction.reactant.0.iter().enumerate() {
                    if c > 0 {
                        v *= x[s].powi(c as i32);
                    }
                }
                v
            })
            .collect()
    }

    pub fn mass_action_rhs(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_state(x)?;
        Ok(self.rhs_unchecked(x))
    }

    pub(crate) fn rhs_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let d = self.species.len();
        let mut out = vec![0.0; d];
        for (reaction, flux) in self.reactions.iter().zip(self.fluxes(x)) {
            for s in 0..d {
                let delta = reaction.product.0[s] as i64 - reaction.reactant.0[s] as i64;
                if delta != 0 {
                    out[s] += delta as f64 * flux;
                }
            }
        }
        out
    }

    /// Per-species sum of absolute flux contributions.
    pub(crate) fn flux_scale(&self, x: &[f64]) -> Vec<f64> {
        let d = self.species.len();
        let mut out = vec![0.0; d];
        for (reaction, flux) in self.reactions.iter().zip(self.fluxes(x)) {
            for s in 0..d {
                let delta = reaction.product.0[s] as i64 - reaction.reactant.0[s] as i64;
                out[s] += (delta.abs() as f64) * flux.abs();
            }
        }
        out
    }

    pub fn mass_action_rhs_exact(&self, x: &[Q]) -> Result<Vec<Q>, ModelError> {
        let d = self.species.len();
        if x.len() != d {
            return Err(ModelError::StateLength { expected: d, found: x.len() });
        }
        if let Some(s) = x.iter().position(|v| v.is_negative()) {
            return Err(ModelError::NegativeConcentration {
                species: self.species[s].name.clone(),
                value: to_f64(&x[s]),
            });
        }
        let mut out = vec![Q::zero(); d];
        for (reaction, k) in self.reactions.iter().zip(&self.rates) {
            let mut flux = k.clone();
            for (s, &c) in reaction.reactant.0.iter().enumerate() {
                for _ in 0..c {
                    flux *= &x[s];
                }
            }
            for s in 0..d {
                let delta = reaction.product.0[s] as i64 - reaction.reactant.0[s] as i64;
                if delta != 0 {
                    out[s] += q(delta) * &flux;
                }
            }
        }
        Ok(out)
    }

    pub fn mass_action_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, ModelError> {
        self.check_state(x)?;
        Ok(self.jacobian_unchecked(x))
    }

    pub(crate) fn jacobian_unchecked(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.species.len();
        let mut jac = DMatrix::zeros(d, d);
        for (reaction, &k) in self.reactions.iter().zip(&self.rates_f64) {
            for kvar in 0..d {
                let order = reaction.reactant.0[kvar];
                if order == 0 {
                    continue;
                }
                let mut partial = k * order as f64 * x[kvar].powi(order as i32 - 1);
                for (s, &c) in reaction.reactant.0.iter().enumerate() {
                    if s != kvar && c > 0 {
                        partial *= x[s].powi(c as i32);
                    }
                }
                for s in 0..d {
                    let delta = reaction.product.0[s] as i64 - reaction.reactant.0[s] as i64;
                    if delta != 0 {
                        jac[(s, kvar)] += delta as f64 * partial;
                    }
                }
            }
        }
        jac
    }

    /// Text of a rate constant as written in the source.
    pub fn rate_label(&self, reaction: usize) -> String {
        match &self.reactions[reaction].rate_constant {
            RateConstant::Value(v) => format_rational(v),
            RateConstant::Named(n) => n.clone(),
        }
    }

    /// Parses an initial condition such as `all=1,X=2` (missing species default to zero).
    pub fn parse_state(&self, spec: &str) -> Result<Vec<Q>, ModelError> {
        let mut x = vec![Q::zero(); self.species.len()];
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| ModelError::InvalidAssignment(part.to_string()))?;
            let (name, value) = (name.trim(), value.trim());
            let v = crate::rational::parse_rational(value)
                .ok_or_else(|| ModelError::InvalidAssignment(part.to_string()))?;
            if v.is_negative() {
                return Err(ModelError::NegativeConcentration { species: name.to_string(), value: to_f64(&v) });
            }
            if name == "all" {
                x.iter_mut().for_each(|e| *e = v.clone());
            } else {
                let idx = self.species_index(name).ok_or_else(|| ModelError::UnknownSpecies(name.to_string()))?;
                x[idx] = v;
            }
        }
        Ok(x)
    }
}

/// Uniform concentration vector.
pub fn uniform_state(d: usize, value: i64) -> Vec<Q> {
    vec![q(value); d]
}
