//! Dose-response curves and the uniqueness probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::solver::{SolverContext, SolverOptions, SteadyState};
use crate::model::ReactionNetwork;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one point")]
    Empty,
    #[error("grid bounds must be positive and increasing, got {start}:{stop}")]
    Bounds { start: f64, stop: f64 },
    #[error("malformed grid spec `{0}`; expected start:stop:count")]
    Syntax(String),
}

/// Geometric grid of input shifts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self, GridError> {
        if count == 0 {
            return Err(GridError::Empty);
        }
        let ok = start.is_finite() && stop.is_finite() && start > 0.0 && (stop > start || (count == 1 && stop == start));
        if !ok {
            return Err(GridError::Bounds { start, stop });
        }
        Ok(LambdaGrid { start, stop, count })
    }

    /// 40 points over `[0.1, 1e6]·scale`.
    pub fn default_for(scale: f64) -> Self {
        let s = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
        LambdaGrid { start: 0.1 * s, stop: 1e6 * s, count: 40 }
    }

    pub fn parse(spec: &str) -> Result<Self, GridError> {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(GridError::Syntax(spec.to_string()));
        }
        let start: f64 = parts[0].parse().map_err(|_| GridError::Syntax(spec.to_string()))?;
        let stop: f64 = parts[1].parse().map_err(|_| GridError::Syntax(spec.to_string()))?;
        let count: usize = parts[2].parse().map_err(|_| GridError::Syntax(spec.to_string()))?;
        LambdaGrid::new(start, stop, count)
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let (a, b) = (self.start.ln(), self.stop.ln());
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| match k {
                0 => self.start,
                k if k + 1 == self.count => self.stop,
                k => (a + (b - a) * k as f64 / n).exp(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DoseResponseCurve {
    pub input_index: usize,
    pub output_index: usize,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub base_x0: Vec<f64>,
}

impl DoseResponseCurve {
    pub fn from_states(input: usize, output: usize, lambdas: &[f64], states: &[SteadyState], base_x0: &[f64]) -> Self {
        DoseResponseCurve {
            input_index: input,
            output_index: output,
            lambdas: lambdas.to_vec(),
            values: states.iter().map(|s| s.x[output]).collect(),
            residuals: states.iter().map(|s| s.residual).collect(),
            converged: states.iter().map(|s| s.converged).collect(),
            base_x0: base_x0.to_vec(),
        }
    }

    /// Converged `(λ, value)` pairs.
    pub fn converged_points(&self) -> Vec<(f64, f64)> {
        self.lambdas
            .iter()
            .zip(&self.values)
            .zip(&self.converged)
            .filter(|(_, &c)| c)
            .map(|((&l, &v), _)| (l, v))
            .collect()
    }
}

pub fn shifted(x0: &[f64], input: usize, lambda: f64) -> Vec<f64> {
    let mut x = x0.to_vec();
    x[input] += lambda;
    x
}

/// Steady states of `x0 + λ·e_input` for every λ, solved independently.
pub fn sweep_states(
    ctx: &SolverContext<'_>,
    x0: &[f64],
    input: usize,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Vec<SteadyState> {
    lambdas.par_iter().map(|&l| ctx.solve(&shifted(x0, input, l), opts)).collect()
}

pub fn dose_response(
    net: &ReactionNetwork,
    x0: &[f64],
    input: usize,
    output: usize,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> DoseResponseCurve {
    let ctx = SolverContext::new(net);
    let states = sweep_states(&ctx, x0, input, lambdas, opts);
    DoseResponseCurve::from_states(input, output, lambdas, &states, x0)
}

/// Random positive points of the compatibility class of `x`, by hit-and-run along the stoichiometric subspace.
pub fn sample_compatibility_class(ctx: &SolverContext<'_>, x: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let basis = ctx.stoichiometric_basis();
    let d = x.len();
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut current: Vec<f64> = x.iter().map(|v| v.max(1e-9 * scale)).collect();
    let mut out = Vec::with_capacity(n);
    if basis.is_empty() {
        return vec![current; n];
    }
    for _ in 0..n {
        for _ in 0..20 {
            let mut dir = vec![0.0; d];
            for b in &basis {
                let w: f64 = rng.gen_range(-1.0..1.0);
                for (di, bi) in dir.iter_mut().zip(b) {
                    *di += w * bi;
                }
            }
            let (mut lo, mut hi) = (-10.0 * scale, 10.0 * scale);
            let norm = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm == 0.0 {
                continue;
            }
            for (c, di) in current.iter().zip(&dir) {
                if *di > 0.0 {
                    lo = lo.max(-c / di);
                } else if *di < 0.0 {
                    hi = hi.min(-c / di);
                }
            }
            let t = lo + (hi - lo) * rng.gen_range(0.02..0.98);
            for (c, di) in current.iter_mut().zip(&dir) {
                *c = (*c + t * di).max(0.0);
            }
        }
        out.push(current.clone());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct WellDefinedness {
    pub unique: bool,
    pub starts: Vec<Vec<f64>>,
    pub states: Vec<SteadyState>,
    pub warnings: Vec<String>,
}

/// Whether random starts in the class of `x0 + λ·e_input` reach one steady state.
pub fn check_well_defined_detailed(
    net: &ReactionNetwork,
    x0: &[f64],
    input: usize,
    lambda_probe: f64,
    n_starts: usize,
    seed: u64,
    opts: &SolverOptions,
) -> WellDefinedness {
    let ctx = SolverContext::new(net);
    let base = shifted(x0, input, lambda_probe);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![base.clone()];
    starts.extend(sample_compatibility_class(&ctx, &base, n_starts.max(2) - 1, &mut rng));
    let states: Vec<SteadyState> = starts.par_iter().map(|s| ctx.solve(s, opts)).collect();
    let mut warnings = Vec::new();
    for (k, s) in states.iter().enumerate() {
        if !s.converged {
            warnings.push(format!("start {k} did not converge (residual {:e})", s.residual));
        }
    }
    let reference = &states[0].x;
    let norm = reference.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let agree = states
        .iter()
        .all(|s| s.x.iter().zip(reference).all(|(a, b)| (a - b).abs() <= 1e-6 * norm));
    if warnings.is_empty() && !agree {
        warnings.push("starts reached different steady states".to_string());
    }
    WellDefinedness { unique: warnings.is_empty() && agree, starts, states, warnings }
}

pub fn check_well_defined(net: &ReactionNetwork, x0: &[f64], input: usize, lambda_probe: f64, n_starts: usize) -> bool {
    check_well_defined_detailed(net, x0, input, lambda_probe, n_starts, DEFAULT_SEED, &SolverOptions::default()).unique
}
