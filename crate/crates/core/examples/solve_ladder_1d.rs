//! ε-ladder on (0, 1) for the 3-Laplacian with a ≡ 1, α = 0.5.

use std::sync::Arc;

use singular_phi::discretization::Mesh;
use singular_phi::estimates::fit_boundary_lowerbound;
use singular_phi::discretization::distance_field;
use singular_phi::nfunction::NFunctionSpec;
use singular_phi::problem::{Domain, ScalarField, SingularProblem};
use singular_phi::solver::{run_ladder, LadderConfig, NewtonConfig};

fn main() -> singular_phi::error::Result<()> {
    let nf = Arc::new(NFunctionSpec::from_key("p-laplace(3)", None)?.build()?);
    let p = SingularProblem::new(Domain::unit_interval(), nf, ScalarField::Constant(1.0), 0.5)?;
    let mesh = Mesh::unit_interval(64)?.into_shared();
    let cfg = LadderConfig { n_max: 32, ..Default::default() };
    let ladder = run_ladder(&p, &mesh, &cfg.schedule(), &NewtonConfig::default(), &cfg)?;
    let dist = distance_field(&mesh);
    println!("{:>10} {:>6} {:>12} {:>12} {:>10}", "eps", "iters", "max u", "cauchy", "C_fit");
    for lv in ladder.levels.iter().step_by(4).chain(std::iter::once(ladder.last())) {
        let fit = fit_boundary_lowerbound(&lv.solution, &dist, None)?;
        let cauchy = lv.cauchy_max.map_or("-".to_string(), |c| format!("{c:.3e}"));
        println!("{:>10.4e} {:>6} {:>12.6} {:>12} {:>10.4}", lv.eps, lv.trace.iterations(), lv.solution.max_norm(), cauchy, fit.c_fit);
    }
    println!("converged: {}", ladder.converged);
    if let Some(u0) = ladder.extrapolated_limit() {
        println!("extrapolated max norm at eps -> 0: {:.6}", u0.max_norm());
    }
    Ok(())
}
