#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singular_phi::cli::{self, RunConfig, RunOptions, RunReport};
use singular_phi::discretization::{Assembler, DiscreteField, Mesh};
use singular_phi::nfunction::{NFunction, NFunctionSpec};
use singular_phi::problem::{Domain, ScalarField, SingularProblem};
use singular_phi::quad;

pub fn nfun(key: &str) -> Arc<NFunction> {
    Arc::new(NFunctionSpec::from_key(key, None).unwrap().build().unwrap())
}

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn load(name: &str) -> RunConfig {
    RunConfig::from_path(&config_path(name)).unwrap()
}

/// Runs `solve` on a bundled config into a fresh temporary directory.
pub fn solve_config(name: &str, seed: u64) -> (RunReport, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out: Some(dir.path().to_path_buf()),
        quiet: true,
        seed,
    };
    let r = cli::solve(&load(name), &opts).unwrap();
    (r, dir)
}

/// Benchmark configs of the ladder checks.
pub const BENCHMARKS: [&str; 5] = ["p2-alpha05.cfg", "p2-alpha1.cfg", "p2-alpha2.cfg", "pq24-alpha05.cfg", "p3-alpha05.cfg"];

/// Closed-form Φ and the root of sφ(s) = t, independent of the library's
/// quadrature and bracketing.
pub fn closed_form(key: &str) -> (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) {
    match key {
        "p-laplace(2)" => (Box::new(|s: f64| s * s / 2.0), Box::new(|t: f64| t)),
        "p-laplace(3)" => (Box::new(|s: f64| s.powi(3) / 3.0), Box::new(|t: f64| t.sqrt())),
        "pq-laplace(2,4)" => (
            Box::new(|s: f64| s * s / 2.0 + s.powi(4) / 4.0),
            // s + s³ = t: Cardano's formula for the depressed cubic
            Box::new(|t: f64| {
                let r = (t * t / 4.0 + 1.0 / 27.0).sqrt();
                (t / 2.0 + r).cbrt() - (r - t / 2.0).cbrt()
            }),
        ),
        other => panic!("no closed form for {other}"),
    }
}

/// Largest relative defect of t·s* = Φ(s*) + Φ̃(t) over 100 log-spaced t in [1e-3, 1e3].
pub fn young_defect(key: &str) -> f64 {
    let nf = nfun(key);
    let (big_phi, root) = closed_form(key);
    (0..100)
        .map(|i| {
            let t = 10f64.powf(-3.0 + 6.0 * i as f64 / 99.0);
            let s = root(t);
            let lhs = t * s;
            let rhs = big_phi(s) + nf.conjugate(t);
            (lhs - rhs).abs() / lhs
        })
        .fold(0.0, f64::max)
}

pub fn sandwich_samples(seed: u64, n: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (10f64.powf(rng.gen_range(-3.0..3.0)), 10f64.powf(rng.gen_range(-3.0..3.0)))).collect()
}

/// max |J_fd − J| / max |J| with central differences column by column.
pub fn jacobian_defect(p: &SingularProblem, mesh: &Arc<Mesh>, eps: f64, u: &DiscreteField) -> f64 {
    let rp = p.regularize(eps).unwrap();
    let asm = Assembler::new(rp, mesh).unwrap();
    let jac = asm.jacobian(u);
    let base = u.free_values();
    let n = base.len();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..n {
        let h = 1e-6 * base[j].abs().max(1e-2);
        let mut plus = base.clone();
        plus[j] += h;
        let mut minus = base.clone();
        minus[j] -= h;
        let rp_ = asm.residual(&DiscreteField::from_free(mesh.clone(), &plus));
        let rm = asm.residual(&DiscreteField::from_free(mesh.clone(), &minus));
        for i in 0..n {
            let fd = (rp_[i] - rm[i]) / (2.0 * h);
            let an = jac.get(i, j);
            worst = worst.max((fd - an).abs());
            scale = scale.max(an.abs());
        }
    }
    worst / scale
}

pub fn random_state(mesh: &Arc<Mesh>, rng: &mut ChaCha8Rng) -> DiscreteField {
    let free: Vec<f64> = (0..mesh.n_free()).map(|_| rng.gen_range(0.05..1.0)).collect();
    DiscreteField::from_free(mesh.clone(), &free)
}

/// The Jacobian test matrix: (label, problem, mesh).
pub fn jacobian_cases() -> Vec<(String, SingularProblem, Arc<Mesh>)> {
    let mut out = Vec::new();
    for key in ["p-laplace(2)", "p-laplace(3)", "pq-laplace(2,4)"] {
        let nf = nfun(key);
        let p1 = SingularProblem::new(Domain::unit_interval(), nf.clone(), ScalarField::expr("1 + x").unwrap(), 0.7).unwrap();
        out.push((format!("{key} 1D"), p1, Mesh::unit_interval(24).unwrap().into_shared()));
        let p2 = SingularProblem::new(Domain::unit_square(), nf, ScalarField::expr("1 + x*y").unwrap(), 0.5)
            .unwrap()
            .with_convex(ScalarField::Constant(0.5), 0.5, None)
            .unwrap();
        out.push((format!("{key} 2D"), p2, Mesh::unit_square(5).unwrap().into_shared()));
    }
    out
}

/// ∫₀¹ f by adaptive quadrature, for oracles.
pub fn integral(f: impl Fn(f64) -> f64) -> f64 {
    quad::integrate(&f, 0.0, 1.0, 1e-12, 0.0).0
}
