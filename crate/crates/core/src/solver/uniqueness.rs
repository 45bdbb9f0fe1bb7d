use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::newton::{solve_level, NewtonConfig};
use crate::discretization::{DiscreteField, Mesh};
use crate::error::{Error, Result};
use crate::problem::SingularProblem;

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub eps: f64,
    /// ‖u_i‖_∞ of every start that converged
    pub max_norms: Vec<f64>,
    /// (i, j, ‖u_i − u_j‖_∞) over all pairs
    pub discrepancies: Vec<(usize, usize, f64)>,
    pub max_discrepancy: f64,
    /// starts whose Newton solve failed, with the error message
    pub failures: Vec<(usize, String)>,
    pub threshold: f64,
    pub passed: bool,
}

/// Solves the ε-level from `n_starts` random positive initial states and
/// compares all pairs. Passes iff every start converges and every pairwise
/// max-norm discrepancy is at most 10·tol_residual.
///
/// Initial values are drawn independently per interior vertex from
/// U(0.01, 1)·scale, where `scale` is the max norm of a reference solve from zero.
pub fn multistart_uniqueness_check(
    p: &SingularProblem,
    mesh: &Arc<Mesh>,
    eps: f64,
    cfg: &NewtonConfig,
    n_starts: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    if n_starts < 2 {
        return Err(Error::Precondition(format!("multistart needs at least 2 starts, got {n_starts}")));
    }
    let rp = p.regularize(eps)?;
    let scale = match solve_level(&rp, &DiscreteField::zeros(mesh.clone()), cfg) {
        Ok((u, _)) => u.max_norm().max(eps),
        Err(_) => 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sols: Vec<(usize, DiscreteField)> = Vec::new();
    let mut failures = Vec::new();
    for i in 0..n_starts {
        let free: Vec<f64> = (0..mesh.n_free()).map(|_| scale * rng.gen_range(0.01..1.0)).collect();
        let init = DiscreteField::from_free(mesh.clone(), &free);
        match solve_level(&rp, &init, cfg) {
            Ok((u, _)) => sols.push((i, u)),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    let mut discrepancies = Vec::new();
    for (a, (i, ui)) in sols.iter().enumerate() {
        for (j, uj) in &sols[a + 1..] {
            discrepancies.push((*i, *j, ui.sub(uj).max_norm()));
        }
    }
    let max_discrepancy = discrepancies.iter().map(|d| d.2).fold(0.0, f64::max);
    let threshold = 10.0 * cfg.tol_residual;
    Ok(UniquenessReport {
        eps,
        max_norms: sols.iter().map(|(_, u)| u.max_norm()).collect(),
        passed: failures.is_empty() && max_discrepancy <= threshold,
        discrepancies,
        max_discrepancy,
        failures,
        threshold,
    })
}
