use serde::{Deserialize, Serialize};

use crate::discretization::{solve, Assembler, DiscreteField, LinearSolver};
use crate::error::{Error, Result};
use crate::problem::RegularizedProblem;

/// Damped Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    /// stop when the residual max-norm is at most this
    pub tol_residual: f64,
    pub max_iters: usize,
    /// step reduction factor of the backtracking line search, in (0, 1)
    pub backtrack: f64,
    /// smallest step length tried before giving up
    pub min_step: f64,
    /// clip trial iterates at u ≥ −ε/2
    pub positivity_guard: bool,
    pub linear_solver: LinearSolver,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iters: 200,
            backtrack: 0.5,
            min_step: 1e-10,
            positivity_guard: true,
            linear_solver: LinearSolver::Direct,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(Error::config("solver.tol_residual", "must be positive"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::config("solver.backtrack", "must lie in (0, 1)"));
        }
        if !(self.min_step > 0.0 && self.min_step < 1.0) {
            return Err(Error::config("solver.min_step", "must lie in (0, 1)"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("solver.max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Residual history of one Newton solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonTrace {
    /// residual max-norm before the first step and after every accepted step
    pub residuals: Vec<f64>,
    /// accepted step lengths
    pub steps: Vec<f64>,
}

impl NewtonTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solves the discrete regularized equation starting from `init`.
///
/// A step is accepted only if it strictly lowers the residual max-norm; the
/// step is halved (by `backtrack`) until it does or falls below `min_step`.
pub fn solve_level(rp: &RegularizedProblem, init: &DiscreteField, cfg: &NewtonConfig) -> Result<(DiscreteField, NewtonTrace)> {
    cfg.validate()?;
    let mesh = init.mesh().clone();
    let asm = Assembler::new(*rp, &mesh)?;
    let floor = -0.5 * rp.eps;
    let guard = |x: &mut [f64]| {
        if cfg.positivity_guard {
            x.iter_mut().for_each(|v| *v = v.max(floor));
        }
    };
    let mut free = init.free_values();
    guard(&mut free);
    let mut u = DiscreteField::from_free(mesh.clone(), &free);
    let (mut r, mut jac) = asm.residual_and_jacobian(&u);
    let mut norm = max_abs(&r);
    let mut trace = NewtonTrace {
        residuals: vec![norm],
        steps: Vec::new(),
    };
    let fail = |u: DiscreteField, trace: NewtonTrace| Error::NonConvergence {
        iterations: trace.iterations(),
        best_residual: trace.final_residual(),
        best: Box::new(u),
        trace,
    };
    while norm > cfg.tol_residual {
        if !norm.is_finite() || trace.iterations() >= cfg.max_iters {
            return Err(fail(u, trace));
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = match solve(&jac, &rhs, cfg.linear_solver) {
            Ok(d) => d,
            Err(_) => return Err(fail(u, trace)),
        };
        let mut step = 1.0;
        let accepted = loop {
            let mut trial: Vec<f64> = free.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            guard(&mut trial);
            let ut = DiscreteField::from_free(mesh.clone(), &trial);
            let rt = asm.residual(&ut);
            let nt = max_abs(&rt);
            if nt < norm {
                break Some((trial, ut));
            }
            step *= cfg.backtrack;
            if step < cfg.min_step {
                break None;
            }
        };
        let Some((trial, ut)) = accepted else {
            return Err(fail(u, trace));
        };
        free = trial;
        u = ut;
        (r, jac) = asm.residual_and_jacobian(&u);
        norm = max_abs(&r);
        trace.residuals.push(norm);
        trace.steps.push(step);
    }
    if let Some((vertex, value)) = u.min_interior() {
        if value <= 0.0 {
            return Err(Error::PositivityViolation { vertex, value });
        }
    }
    Ok((u, trace))
}
