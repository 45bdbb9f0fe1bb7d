//! Singular-convex problem on the unit square: −Δu = 1/u^0.3 + (1 + xy) u^0.5.

use std::sync::Arc;

use singular_phi::discretization::Mesh;
use singular_phi::nfunction::NFunctionSpec;
use singular_phi::problem::{Domain, ScalarField, SingularProblem};
use singular_phi::solver::{coercivity_radius, run_ladder, LadderConfig, NewtonConfig};

fn main() -> singular_phi::error::Result<()> {
    let nf = Arc::new(NFunctionSpec::from_key("p-laplace(2)", None)?.build()?);
    let p = SingularProblem::new(Domain::unit_square(), nf, ScalarField::Constant(1.0), 0.3)?
        .with_convex(ScalarField::expr("1 + x*y")?, 0.5, None)?;
    let mesh = Mesh::unit_square(24)?.into_shared();
    let cert = coercivity_radius(&p.regularize(1.0)?, &mesh)?;
    println!("coercivity radius r0 = {:.4} (C1 = {:.4}, C2 = {:.4})", cert.r0, cert.c1, cert.c2);

    let cfg = LadderConfig { n_max: 16, ..Default::default() };
    let ladder = run_ladder(&p, &mesh, &cfg.schedule(), &NewtonConfig::default(), &cfg)?;
    let u = &ladder.last().solution;
    println!("{} vertices, eps = {:.4}, max u = {:.6}, converged = {}", mesh.n_vertices(), ladder.last().eps, u.max_norm(), ladder.converged);
    // u along the diagonal
    let mut diag: Vec<(f64, f64)> = (0..mesh.n_vertices())
        .map(|v| (mesh.vertex(v), u.values()[v]))
        .filter(|(x, _)| (x[0] - x[1]).abs() < 1e-12)
        .map(|(x, val)| (x[0], val))
        .collect();
    diag.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (x, val) in diag.iter().step_by(4) {
        println!("u({x:.3}, {x:.3}) = {val:.6}");
    }
    Ok(())
}
