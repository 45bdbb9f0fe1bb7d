mod common;

use std::fs;
use std::path::Path;

use common::*;
use singular_phi::cli::{self, main_from_args, RunConfig, RunOptions, Status};

fn run(args: &[&str]) -> i32 {
    main_from_args(std::iter::once("singular-phi").chain(args.iter().copied()))
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn golden_laplacian_run() {
    let (r, dir) = solve_config("p2-alpha1.cfg", 0);
    assert_eq!(r.status, Status::Ok);
    assert!(r.hypotheses.growth.all_pass() && !r.hypotheses.applicable_theorems().is_empty());
    let checks = r.diagnostics.checks();
    assert_eq!(checks.len(), 6, "{checks:?}");
    assert!(r.diagnostics.all_pass(), "{checks:?}");
    for f in ["solution.csv", "ladder.csv", "moser.csv", "envelope.csv", "report.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    // the ladder runs the harmonic default 1, 1/2, …, 1/64
    assert_eq!(r.levels.len(), 64);
    assert!((r.levels.last().unwrap().eps - 1.0 / 64.0).abs() < 1e-15);
}

#[test]
fn csv_outputs_are_finite_and_rectangular() {
    let (_r, dir) = solve_config("pq24-alpha05.cfg", 0);
    for (name, bytes) in csv_bytes(dir.path()) {
        let mut rdr = csv::Reader::from_reader(bytes.as_slice());
        let width = rdr.headers().unwrap().len();
        let mut rows = 0;
        for rec in rdr.records() {
            let rec = rec.unwrap();
            assert_eq!(rec.len(), width, "{name}");
            for f in rec.iter().filter(|f| !f.is_empty()) {
                let v: f64 = f.parse().unwrap_or_else(|_| panic!("{name}: `{f}`"));
                assert!(v.is_finite(), "{name}: {f}");
            }
            rows += 1;
        }
        assert!(rows > 0, "{name}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = config_path("pq24-alpha05.cfg");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let code = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "--quiet", "--seed", "7"]);
        assert_eq!(code, 0);
    }
    let (ca, cb) = (csv_bytes(a.path()), csv_bytes(b.path()));
    assert_eq!(ca.len(), 4);
    assert_eq!(ca, cb);
}

#[test]
fn check_and_moser_verbs() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let cfg = config_path("square-convex.cfg");
    assert_eq!(run(&["check", "--config", cfg.to_str().unwrap(), "--out", o, "--quiet"]), 0);
    let report = fs::read_to_string(out.path().join("report.txt")).unwrap();
    assert!(report.contains("APPLIES singular-convex existence") && !report.contains(" fail "), "{report}");

    assert_eq!(run(&["moser", "--ell", "2", "--dim-n", "3", "--alpha", "0.5", "--q", "2", "--out", o, "--quiet"]), 0);
    let m = fs::read_to_string(out.path().join("moser.csv")).unwrap();
    assert!(m.lines().count() > 10);
    // δ ≤ 1 is an error
    assert_eq!(run(&["moser", "--ell", "2", "--dim-n", "3", "--alpha", "0.5", "--q", "1.2", "--out", o, "--quiet"]), 1);
}

#[test]
fn config_errors_name_the_field() {
    let bad = [
        ("[problem]\nphi = \"p-laplace(2)\"\na = \"1\"\nalpha = 1.0\n[solver]\ntol_residaul = 1e-9\n", "solver.tol_residaul"),
        ("[problem]\nphi = \"p-laplace(2)\"\na = \"1\"\nalpha = -1.0\n", "problem.alpha"),
        ("[problem]\nphi = \"r-laplace(2)\"\na = \"1\"\nalpha = 1.0\n", "problem.phi"),
        ("[problem]\nphi = \"p-laplace(2)\"\na = \"1 + \"\nalpha = 1.0\n", "problem.a"),
    ];
    for (src, path) in bad {
        let err = RunConfig::from_toml(src).and_then(|c| c.build_problem().map(|_| ())).unwrap_err().to_string();
        assert!(err.contains(path), "{path}: {err}");
    }
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.cfg");
    fs::write(&f, bad[0].0).unwrap();
    assert_eq!(run(&["solve", "--config", f.to_str().unwrap(), "--quiet"]), 1);
    assert_eq!(run(&["solve", "--config", "/nonexistent.cfg", "--quiet"]), 1);
}

#[test]
fn failed_level_keeps_earlier_outputs() {
    let src = r#"
[problem]
phi = "p-laplace(2)"
a = "1"
alpha = 0.5

[mesh]
n = 16

[solver]
max_iters = 3

[ladder]
schedule = [1.0, 0.5, 1e-6]
"#;
    let cfg = RunConfig::from_toml(src).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out: Some(dir.path().to_path_buf()),
        quiet: true,
        seed: 0,
    };
    let r = cli::solve(&cfg, &opts).unwrap();
    assert!(matches!(&r.status, Status::Failed(m) if m.contains("1e-6") || m.contains("1e-06")), "{:?}", r.status);
    assert_eq!(r.levels.len(), 2);
    let ladder = fs::read_to_string(dir.path().join("ladder.csv")).unwrap();
    assert_eq!(ladder.lines().count(), 3);
    assert!(dir.path().join("solution.csv").is_file());
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("failed"), "{report}");
}
