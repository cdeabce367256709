//! Steady states by linearly implicit integration followed by Newton polish on the reduced system.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::conservation::{totals, ConservedTotals, LawSet};
use crate::linalg::QMatrix;
use crate::model::ReactionNetwork;
use crate::rational::{from_f64, to_f64, Q};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Scaled residual at which integration hands over to Newton.
    pub switch_tol: f64,
    /// Scaled residual required for convergence.
    pub final_tol: f64,
    pub max_steps: usize,
    pub max_time: f64,
    pub newton_iterations: usize,
    /// Local error tolerance of the integrator, relative to the state norm.
    pub step_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            switch_tol: 1e-6,
            final_tol: 1e-12,
            max_steps: 200_000,
            max_time: 1e15,
            newton_iterations: 60,
            step_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteadyState {
    pub x: Vec<f64>,
    /// `‖f(x)‖∞`.
    pub residual: f64,
    /// `max_k |f_k(x)| / max(1, Σ_r |ν_rk| v_r(x))`.
    pub scaled_residual: f64,
    pub converged: bool,
    pub compat_class: ConservedTotals,
}

/// Network data reused across many solves.
#[derive(Clone, Debug)]
pub struct SolverContext<'a> {
    pub net: &'a ReactionNetwork,
    pub laws: LawSet,
    /// Species whose rows of the stoichiometric matrix form a row basis.
    pub row_basis: Vec<usize>,
    law_rows: Vec<Vec<f64>>,
}

impl<'a> SolverContext<'a> {
    pub fn new(net: &'a ReactionNetwork) -> Self {
        let laws = LawSet::of(net);
        let s = net.stoichiometric_matrix();
        let row_basis = if s.cols == 0 { Vec::new() } else { s.to_rational().transpose().rref() };
        let law_rows = laws.basis.iter().map(|l| l.coeffs.iter().map(to_f64).collect()).collect();
        SolverContext { net, laws, row_basis, law_rows }
    }

    pub fn totals_f64(&self, x: &[f64]) -> Vec<f64> {
        self.law_rows.iter().map(|c| dot(c, x)).collect()
    }

    pub fn exact_totals(&self, x: &[f64]) -> ConservedTotals {
        let xq: Vec<Q> = x.iter().map(|&v| from_f64(v).unwrap_or_default()).collect();
        totals(&self.laws.basis, &xq)
    }

    pub fn scaled_residual(&self, x: &[f64]) -> f64 {
        let f = self.net.rhs_unchecked(x);
        let scale = self.net.flux_scale(x);
        f.iter().zip(&scale).map(|(v, s)| v.abs() / s.max(1.0)).fold(0.0, f64::max)
    }

    /// Basis of the stoichiometric subspace as column vectors.
    pub fn stoichiometric_basis(&self) -> Vec<Vec<f64>> {
        let s = self.net.stoichiometric_matrix();
        if s.cols == 0 {
            return Vec::new();
        }
        let m: QMatrix = s.to_rational();
        let pivots = m.clone().rref();
        pivots.iter().map(|&c| (0..s.rows).map(|r| to_f64(m.get(r, c))).collect()).collect()
    }

    pub fn solve(&self, x0: &[f64], opts: &SolverOptions) -> SteadyState {
        let target = self.totals_f64(x0);
        let mut x: Vec<f64> = x0.iter().map(|v| v.max(0.0)).collect();
        let mut switch_tol = opts.switch_tol;
        let mut h = initial_step(self.net, &x);
        let mut t = 0.0;
        let mut steps = 0;
        let mut converged = false;
        while steps < opts.max_steps && t < opts.max_time {
            let r = self.scaled_residual(&x);
            if r < opts.final_tol {
                converged = true;
                break;
            }
            if r < switch_tol {
                if let Some(y) = self.newton(&x, &target, opts) {
                    x = y;
                    converged = true;
                    break;
                }
                switch_tol *= 1e-2;
            }
            match self.rosenbrock_step(&x, h, opts) {
                Some((y, err)) if err <= 1.0 => {
                    x = y;
                    t += h;
                    steps += 1;
                    let grow = if err < 1e-12 { 5.0 } else { (0.9 / err.sqrt()).clamp(0.2, 5.0) };
                    h *= grow;
                }
                Some((_, err)) => h *= (0.9 / err.sqrt()).clamp(0.1, 0.5),
                None => h *= 0.25,
            }
            if h < 1e-300 {
                break;
            }
        }
        if converged {
            x = self.refine(x, &self.exact_totals(x0).values, opts);
        }
        self.finish(x, converged)
    }

    /// Newton corrections with the residual of the reduced system evaluated exactly.
    fn refine(&self, x: Vec<f64>, target: &[Q], opts: &SolverOptions) -> Vec<f64> {
        let mut y = x.clone();
        for _ in 0..6 {
            let Some(yq) = y.iter().map(|&v| from_f64(v)).collect::<Option<Vec<Q>>>() else { return x };
            let Ok(f) = self.net.mass_action_rhs_exact(&yq) else { return x };
            let d = y.len();
            let mut g = DVector::zeros(d);
            for (row, &s) in self.row_basis.iter().enumerate() {
                g[row] = to_f64(&f[s]);
            }
            let offset = self.row_basis.len();
            for (k, law) in self.laws.basis.iter().enumerate() {
                g[offset + k] = to_f64(&(law.dot(&yq) - &target[k]));
            }
            let (_, jg) = self.reduced_system(&y, &vec![0.0; target.len()]);
            let Some(delta) = jg.lu().solve(&(-g)) else { return x };
            let next: Vec<f64> = y.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            if next.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return x;
            }
            let small = y.iter().zip(&next).all(|(a, b)| (a - b).abs() <= 4.0 * f64::EPSILON * a.abs());
            y = next;
            if small {
                break;
            }
        }
        if self.scaled_residual(&y) < opts.final_tol {
            y
        } else {
            x
        }
    }

    fn finish(&self, mut x: Vec<f64>, converged: bool) -> SteadyState {
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for v in &mut x {
            if *v < 0.0 && *v >= -1e-12 * scale {
                *v = 0.0;
            }
        }
        let f = self.net.rhs_unchecked(&x);
        let residual = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scaled_residual = self.scaled_residual(&x);
        let nonneg = x.iter().all(|&v| v >= 0.0);
        SteadyState {
            compat_class: self.exact_totals(&x),
            converged: converged && nonneg && scaled_residual.is_finite(),
            x,
            residual,
            scaled_residual,
        }
    }

    /// One linearly implicit Euler step of size `h` with a step-doubling error estimate.
    fn rosenbrock_step(&self, x: &[f64], h: f64, opts: &SolverOptions) -> Option<(Vec<f64>, f64)> {
        let full = self.euler(x, h)?;
        let half = self.euler(x, h / 2.0)?;
        let two = self.euler(&half, h / 2.0)?;
        let norm = x.iter().chain(two.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let err = full
            .iter()
            .zip(&two)
            .zip(x)
            .map(|((a, b), x)| (a - b).abs() / (opts.step_tol * (x.abs().max(b.abs())) + opts.step_tol * 1e-6 * norm + 1e-300))
            .fold(0.0f64, f64::max);
        // Richardson extrapolation of a first-order pair.
        let mut y: Vec<f64> = two.iter().zip(&full).map(|(b, a)| 2.0 * b - a).collect();
        if y.iter().any(|v| *v < 0.0) {
            y = two;
        }
        let floor = -1e-14 * norm;
        if y.iter().any(|v| *v < floor || !v.is_finite()) {
            return None;
        }
        y.iter_mut().for_each(|v| *v = v.max(0.0));
        Some((y, err))
    }

    fn euler(&self, x: &[f64], h: f64) -> Option<Vec<f64>> {
        let d = x.len();
        let f = DVector::from_vec(self.net.rhs_unchecked(x));
        let jac = self.net.jacobian_unchecked(x);
        let m = DMatrix::identity(d, d) - jac * h;
        let delta = m.lu().solve(&(f * h))?;
        let y: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if y.iter().any(|v| !v.is_finite() || *v < -1e-14 * norm.max(1e-300)) {
            return None;
        }
        Some(y)
    }

    fn reduced_system(&self, x: &[f64], target: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let d = x.len();
        let f = self.net.rhs_unchecked(x);
        let jac = self.net.jacobian_unchecked(x);
        let mut g = DVector::zeros(d);
        let mut jg = DMatrix::zeros(d, d);
        for (row, &s) in self.row_basis.iter().enumerate() {
            g[row] = f[s];
            for c in 0..d {
                jg[(row, c)] = jac[(s, c)];
            }
        }
        let offset = self.row_basis.len();
        for (k, law) in self.law_rows.iter().enumerate() {
            g[offset + k] = dot(law, x) - target[k];
            for c in 0..d {
                jg[(offset + k, c)] = law[c];
            }
        }
        (g, jg)
    }

    /// Damped Newton on the row-basis equations plus the pinned totals; `None` when it stalls.
    fn newton(&self, x0: &[f64], target: &[f64], opts: &SolverOptions) -> Option<Vec<f64>> {
        let mut x = x0.to_vec();
        for _ in 0..opts.newton_iterations {
            if self.scaled_residual(&x) < opts.final_tol {
                return Some(x);
            }
            let (g, jg) = self.reduced_system(&x, target);
            let delta = jg.lu().solve(&(-g))?;
            let mut theta: f64 = 1.0;
            for (v, dv) in x.iter().zip(delta.iter()) {
                if *dv < 0.0 && v + dv < 0.0 {
                    theta = theta.min(0.99 * v / -dv);
                }
            }
            if theta < 1e-8 || delta.iter().any(|v| !v.is_finite()) {
                return None;
            }
            for (v, dv) in x.iter_mut().zip(delta.iter()) {
                *v = (*v + theta * dv).max(0.0);
            }
        }
        (self.scaled_residual(&x) < opts.final_tol).then_some(x)
    }

    /// States of the linearly implicit integrator at the requested times.
    pub fn trajectory(&self, x0: &[f64], times: &[f64], opts: &SolverOptions) -> Vec<Vec<f64>> {
        let mut x: Vec<f64> = x0.to_vec();
        let mut t = 0.0;
        let mut h = initial_step(self.net, &x);
        let mut out = Vec::with_capacity(times.len());
        for &stop in times {
            let mut guard = 0;
            while t < stop && guard < opts.max_steps {
                guard += 1;
                let step = h.min(stop - t);
                match self.rosenbrock_step(&x, step, opts) {
                    Some((y, err)) if err <= 1.0 => {
                        x = y;
                        t += step;
                        h = step * if err < 1e-12 { 5.0 } else { (0.9 / err.sqrt()).clamp(0.2, 5.0) };
                    }
                    Some((_, err)) => h = step * (0.9 / err.sqrt()).clamp(0.1, 0.5),
                    None => h = step * 0.25,
                }
            }
            out.push(x.clone());
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn initial_step(net: &ReactionNetwork, x: &[f64]) -> f64 {
    let f = net.rhs_unchecked(x);
    let rate = f.iter().zip(x).map(|(f, x)| f.abs() / x.abs().max(1e-6)).fold(0.0f64, f64::max);
    if rate > 0.0 {
        (1e-3 / rate).min(1e-2)
    } else {
        1e-2
    }
}

pub fn find_steady_state(net: &ReactionNetwork, x0: &[f64], opts: &SolverOptions) -> SteadyState {
    SolverContext::new(net).solve(x0, opts)
}
