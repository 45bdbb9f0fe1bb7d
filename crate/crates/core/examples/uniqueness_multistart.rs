//! Newton from random initial states lands on the same discrete solution.

use std::sync::Arc;

use singular_phi::discretization::Mesh;
use singular_phi::nfunction::NFunctionSpec;
use singular_phi::problem::{Domain, ScalarField, SingularProblem};
use singular_phi::solver::{multistart_uniqueness_check, NewtonConfig};

fn main() -> singular_phi::error::Result<()> {
    let mesh = Mesh::unit_interval(64)?.into_shared();
    for key in ["p-laplace(2)", "pq-laplace(2,4)", "p-laplace(3)"] {
        let nf = Arc::new(NFunctionSpec::from_key(key, None)?.build()?);
        let p = SingularProblem::new(Domain::unit_interval(), nf, ScalarField::expr("1 + x")?, 0.5)?;
        let u = multistart_uniqueness_check(&p, &mesh, 1.0 / 32.0, &NewtonConfig::default(), 8, 42)?;
        println!(
            "{key:<16} starts = {}, max ||u_i||_inf = {:.6}, max discrepancy = {:.2e}, agree = {}",
            u.max_norms.len(),
            u.max_norms.iter().cloned().fold(0.0, f64::max),
            u.max_discrepancy,
            u.passed
        );
    }
    Ok(())
}
