//! Which existence and regularity statements apply to a given problem.

use std::sync::Arc;

use singular_phi::discretization::Mesh;
use singular_phi::nfunction::NFunctionSpec;
use singular_phi::problem::{check_problem, Domain, ScalarField, SingularProblem};

fn main() -> singular_phi::error::Result<()> {
    let nf = Arc::new(NFunctionSpec::from_key("pq-laplace(2,3)", None)?.build()?);
    let mesh = Mesh::unit_interval(128)?;
    let cases = [
        ("smooth a, alpha = 0.5", ScalarField::Constant(1.0), 0.5),
        ("a ~ d^-0.4, alpha = 0.5", ScalarField::expr("d^(-0.4)")?, 0.5),
        ("strong singularity, alpha = 2", ScalarField::Constant(1.0), 2.0),
    ];
    for (label, a, alpha) in cases {
        let p = SingularProblem::new(Domain::unit_interval(), nf.clone(), a, alpha)?.with_q(3.0)?;
        println!("== {label}");
        println!("{}", check_problem(&p, &mesh).summary());
    }
    Ok(())
}
