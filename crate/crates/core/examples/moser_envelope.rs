//! Moser exponent schedule, its envelope e^{d0}, and the power means of a
//! computed solution climbing toward ‖u‖_∞.

use std::sync::Arc;

use singular_phi::discretization::Mesh;
use singular_phi::estimates::{envelope_check, MoserConstants, MoserSchedule};
use singular_phi::nfunction::NFunctionSpec;
use singular_phi::problem::{Domain, ScalarField, SingularProblem};
use singular_phi::solver::{run_ladder, LadderConfig, NewtonConfig};

fn main() -> singular_phi::error::Result<()> {
    let s = MoserSchedule::from_exponents(2.0, 3, 1.0, 2.0, 12, 1.0, 1.0, 0.0)?;
    println!("beta1 = {}, delta = {}, sum n/delta^n = {}", s.beta1, s.delta, s.series_n_over_delta());
    println!("{:>4} {:>12} {:>12} {:>12}", "k", "beta_k", "F_k", "F_k/beta_k");
    for (k, b, _, _, f, r) in s.rows() {
        println!("{k:>4} {b:>12.4e} {f:>12.4e} {r:>12.6}");
    }

    let nf = Arc::new(NFunctionSpec::from_key("p-laplace(2)", None)?.build()?);
    let p = SingularProblem::new(Domain::unit_interval(), nf, ScalarField::Constant(1.0), 1.0)?.with_q(2.0)?;
    let mesh = Mesh::unit_interval(64)?.into_shared();
    let cfg = LadderConfig::default();
    let ladder = run_ladder(&p, &mesh, &cfg.schedule(), &NewtonConfig::default(), &cfg)?;
    let consts = MoserConstants::measure(&p, &ladder, 2.0);
    let f1 = MoserSchedule::f1_of(&ladder.first().solution, 4.0);
    let sched = MoserSchedule::for_problem(&p, 20, None, f1, &consts)?;
    let rep = envelope_check(&ladder, &sched);
    println!("\nmeasured B = {:.4}, mu = {:.4}, d0 = {:.4}, envelope = {:.4}", sched.big_b, sched.mu, sched.d0, sched.envelope);
    let last = rep.levels.last().unwrap();
    println!("eps = {:.4}: max u = {:.6}", last.eps, last.max_norm);
    for (k, beta, ln_norm, _) in last.norms.iter().step_by(4) {
        println!("  k = {k:>2}, beta = {beta:>10.3e}: ||u||_beta = {:.6}", ln_norm.exp());
    }
    println!("within envelope: {}, monotone: {}", rep.all_within, rep.all_monotone);
    Ok(())
}
