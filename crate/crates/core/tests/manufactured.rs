mod common;

use common::*;
use singular_phi::cli::{self, RunOptions};

fn orders(name: &str) -> Vec<cli::StudyRow> {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out: Some(dir.path().to_path_buf()),
        quiet: true,
        seed: 0,
    };
    cli::study(&load(name), &opts, None).unwrap()
}

#[test]
fn laplacian_converges_at_second_order() {
    let rows = orders("manufactured-p2.cfg");
    assert_eq!(rows.len(), 3);
    assert!(rows[0].order_max.is_none());
    for r in &rows[1..] {
        let o = r.order_max.unwrap();
        assert!((1.8..=2.2).contains(&o), "{o}");
    }
    // h = 1/64 error bound from the solver example
    assert!(rows[2].max_error <= 2e-3);
}

#[test]
fn three_laplacian_converges_at_reduced_rate() {
    let rows = orders("manufactured-p3.cfg");
    for r in &rows[1..] {
        assert!(r.order_max.unwrap() >= 1.5, "{r:?}");
    }
}

#[test]
fn single_mesh_has_no_order() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out: Some(dir.path().to_path_buf()),
        quiet: true,
        seed: 0,
    };
    let rows = cli::study(&load("manufactured-p2.cfg"), &opts, Some(&[20])).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].order_max.is_none() && rows[0].order_l2.is_none());
    let csv = std::fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",,"), "{csv}");
}

#[test]
fn manufactured_square_solution() {
    // −Δu = a/u with u* = sin(πx) sin(πy): a = 2π² u*²
    let src = r#"
[problem]
domain = "square"
phi = "p-laplace(2)"
alpha = 1.0

[manufactured]
exact = "sin(pi*x)*sin(pi*y)"
sizes = [8, 16]
eps = 1e-6
"#;
    let cfg = singular_phi::cli::RunConfig::from_toml(src).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out: Some(dir.path().to_path_buf()),
        quiet: true,
        seed: 0,
    };
    let rows = cli::study(&cfg, &opts, None).unwrap();
    let o = rows[1].order_l2.unwrap();
    assert!((1.7..=2.3).contains(&o), "{rows:?}");
}
