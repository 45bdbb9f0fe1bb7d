use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{gradient_luxemburg_norm, DiscreteField};
use crate::error::{Error, Result};
use crate::problem::SingularProblem;

/// |A₀(u, ψ_j)| over random unit-norm P1 test fields.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakSolutionReport {
    pub defects: Vec<f64>,
    pub max_defect: f64,
    pub mean_defect: f64,
}

/// A₀(u, ψ) = ∫ φ(|∇u|)∇u·∇ψ − ∫ (a/u^α + b u^γ) ψ.
pub fn weak_defect(p: &SingularProblem, u: &DiscreteField, psi: &DiscreteField) -> f64 {
    let mesh = u.mesh();
    let nf = &p.nfun;
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let g = u.gradient(c);
        let gp = psi.gradient(c);
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if norm > 0.0 {
            total += mesh.cell_measure(c) * nf.phi(norm) * (g[0] * gp[0] + g[1] * gp[1]);
        }
        for q in mesh.quad_points(c) {
            let psi_q = psi.value_at(c, &q.bary);
            // cells with only boundary vertices carry u = ψ = 0
            if psi_q == 0.0 {
                continue;
            }
            let fp = mesh.field_point(c, q);
            let uq = u.value_at(c, &q.bary);
            let mut f = p.a.eval(&fp) / uq.powf(p.alpha);
            if p.has_convex_term() {
                f += p.b.eval(&fp) * uq.powf(p.gamma);
            }
            total -= q.weight * f * psi_q;
        }
    }
    total.abs()
}

/// Tests the unregularized weak formulation against `n_tests` random P1
/// fields with interior values in U(−1, 1), scaled to ‖∇ψ‖_Φ = 1.
pub fn verify_weak_solution(p: &SingularProblem, u: &DiscreteField, n_tests: usize, seed: u64) -> Result<WeakSolutionReport> {
    if let Some((v, x)) = u.min_interior().filter(|m| !(m.1 > 0.0)) {
        return Err(Error::PositivityViolation { vertex: v, value: x });
    }
    if n_tests == 0 {
        return Err(Error::Precondition("need at least one test field".into()));
    }
    let mesh = u.mesh().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut defects = Vec::with_capacity(n_tests);
    while defects.len() < n_tests {
        let free: Vec<f64> = (0..mesh.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let psi = DiscreteField::from_free(mesh.clone(), &free);
        let norm = gradient_luxemburg_norm(&psi, &p.nfun);
        if !(norm > 0.0) {
            continue;
        }
        let psi = psi.map_interior(|x| x / norm);
        defects.push(weak_defect(p, u, &psi));
    }
    let max_defect = defects.iter().copied().fold(0.0, |m: f64, d| if d.is_nan() { d } else { m.max(d) });
    let mean_defect = defects.iter().sum::<f64>() / defects.len() as f64;
    Ok(WeakSolutionReport {
        defects,
        max_defect,
        mean_defect,
    })
}
