use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::RunConfig;
use super::output::{self, num, opt};
use crate::discretization::{distance_field, DiscreteField};
use crate::error::{Error, Result};
use crate::estimates::{
    comparison_chain, envelope_check, fit_boundary_lowerbound, power_seminorm, relative_spread, verify_weak_solution,
    ComparisonChain, EnvelopeReport, MoserConstants, MoserSchedule, WeakSolutionReport,
};
use crate::expr::Expr;
use crate::problem::{check_problem, HypothesisReport, SingularProblem};
use crate::solver::{coercivity_radius, multistart_uniqueness_check, run_ladder, run_ladder_partial, CoercivityCertificate, SolveLadder, UniquenessReport};

/// Flags shared by all verbs.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub quiet: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    NotConverged,
    Failed(String),
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Ok => write!(f, "ok"),
            Status::NotConverged => write!(f, "not converged"),
            Status::Failed(e) => write!(f, "failed: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub max_norm: f64,
    pub cauchy_max: Option<f64>,
    pub cauchy_grad: Option<f64>,
    pub c_fit: f64,
    pub power_seminorm: f64,
    pub grad_norm: f64,
}

/// Pass/fail thresholds of the ladder-level checks.
pub const C_FIT_SPREAD_TOL: f64 = 0.25;
pub const SEMINORM_CHANGE_TOL: f64 = 0.10;

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub comparison: Option<ComparisonChain>,
    /// relative spread of C_fit over the last three levels
    pub c_fit_spread: Option<f64>,
    pub c_fit_min: Option<f64>,
    pub seminorm_change: Option<f64>,
    pub extrapolated_max: Option<f64>,
    pub coercivity: Option<std::result::Result<CoercivityCertificate, String>>,
    pub moser: Option<(MoserConstants, MoserSchedule)>,
    pub envelope: Option<EnvelopeReport>,
    pub weak: Option<WeakSolutionReport>,
    pub uniqueness: Option<UniquenessReport>,
    /// skipped checks with the reason
    pub notes: Vec<String>,
    /// checks that raised an error
    pub errors: Vec<String>,
}

impl Diagnostics {
    /// (name, passed) for every check that ran.
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        let mut v = Vec::new();
        if let Some(c) = &self.comparison {
            v.push(("comparison chain", c.passed));
        }
        if let (Some(s), Some(c)) = (self.c_fit_spread, self.c_fit_min) {
            v.push(("boundary lower bound", s <= C_FIT_SPREAD_TOL && c > 0.0));
        }
        if let Some(s) = self.seminorm_change {
            v.push(("power seminorm", s <= SEMINORM_CHANGE_TOL));
        }
        if let Some(e) = &self.envelope {
            v.push(("L-infinity envelope", e.all_within));
            v.push(("power-mean monotonicity", e.all_monotone));
        }
        if let Some(u) = &self.uniqueness {
            v.push(("multistart uniqueness", u.passed));
        }
        v
    }

    pub fn all_pass(&self) -> bool {
        self.errors.is_empty() && self.checks().iter().all(|c| c.1)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub hypotheses: HypothesisReport,
    pub levels: Vec<LevelSummary>,
    pub converged: bool,
    pub diagnostics: Diagnostics,
    pub timings: Vec<(&'static str, Duration)>,
    pub status: Status,
    pub out_dir: PathBuf,
}

fn say(opts: &RunOptions, msg: impl AsRef<str>) {
    if !opts.quiet {
        println!("{}", msg.as_ref());
    }
}

/// `check`: hypotheses only; writes report.txt.
pub fn check(cfg: &RunConfig, opts: &RunOptions) -> Result<HypothesisReport> {
    let p = cfg.build_problem()?;
    let mesh = cfg.build_mesh(&p.domain)?;
    let rep = check_problem(&p, &mesh);
    let dir = cfg.out_dir(opts.out.as_deref());
    output::ensure_dir(&dir)?;
    let text = format!("{}\n{}", describe(cfg, &p), rep.summary());
    output::write_text(&dir.join("report.txt"), &text)?;
    say(opts, rep.summary());
    Ok(rep)
}

fn describe(cfg: &RunConfig, p: &SingularProblem) -> String {
    let nf = p.nfun.spec();
    let mut s = format!(
        "phi = {}  (ell = {}, m = {}, N = {})\nalpha = {}, gamma = {}, q = {:?}\nmesh h = {}\n",
        nf.phi.key(),
        nf.ell,
        nf.em,
        nf.dim_n,
        p.alpha,
        p.gamma,
        p.q,
        cfg.mesh.h()
    );
    if let Some(a) = &cfg.problem.a {
        let _ = writeln!(s, "a = {a}");
    }
    if let Some(b) = &cfg.problem.b {
        let _ = writeln!(s, "b = {b}");
    }
    s
}

fn level_summaries(p: &SingularProblem, ladder: &SolveLadder, strip: Option<f64>) -> Result<Vec<LevelSummary>> {
    let Some(first) = ladder.levels.first() else {
        return Ok(Vec::new());
    };
    let d = distance_field(first.solution.mesh());
    ladder
        .levels
        .iter()
        .map(|l| {
            Ok(LevelSummary {
                eps: l.eps,
                iterations: l.trace.iterations(),
                residual: l.trace.final_residual(),
                max_norm: l.solution.max_norm(),
                cauchy_max: l.cauchy_max,
                cauchy_grad: l.cauchy_grad,
                c_fit: fit_boundary_lowerbound(&l.solution, &d, strip)?.c_fit,
                power_seminorm: power_seminorm(&l.solution, l.eps, p.alpha, p.ell(), None)?,
                grad_norm: l.grad_norm,
            })
        })
        .collect()
}

fn diagnostics(cfg: &RunConfig, opts: &RunOptions, p: &SingularProblem, ladder: &SolveLadder, levels: &[LevelSummary]) -> Diagnostics {
    let mut dg = Diagnostics::default();
    let dc = &cfg.diagnostics;
    if ladder.levels.is_empty() {
        return dg;
    }
    dg.comparison = comparison_chain(ladder, cfg.solver.tol_residual);
    if levels.len() >= 3 {
        let tail: Vec<f64> = levels[levels.len() - 3..].iter().map(|l| l.c_fit).collect();
        dg.c_fit_spread = Some(relative_spread(&tail));
        dg.c_fit_min = tail.iter().copied().reduce(f64::min);
    }
    if levels.len() >= 2 {
        let (a, b) = (levels[levels.len() - 2].power_seminorm, levels[levels.len() - 1].power_seminorm);
        dg.seminorm_change = Some(if b == 0.0 { 0.0 } else { (b - a).abs() / b });
    }
    dg.extrapolated_max = ladder.extrapolated_limit().map(|u| u.max_norm());
    let last = ladder.last();
    let mesh = last.solution.mesh();
    if dc.coercivity {
        let c = p.regularize(last.eps).and_then(|rp| coercivity_radius(&rp, mesh));
        dg.coercivity = Some(c.map_err(|e| e.to_string()));
    }
    if dc.moser {
        match p.q {
            None => dg.notes.push("Moser schedule skipped: set problem.q".into()),
            Some(q) => {
                let consts = MoserConstants::measure(p, ladder, q);
                let ell = p.ell();
                let beta1 = (ell + p.alpha - 1.0) * q / (q - 1.0);
                let f1 = MoserSchedule::f1_of(&ladder.first().solution, beta1);
                match MoserSchedule::for_problem(p, dc.k_max, dc.mu, f1, &consts) {
                    Ok(s) => {
                        dg.envelope = Some(envelope_check(ladder, &s));
                        dg.moser = Some((consts, s));
                    }
                    Err(e) => dg.errors.push(format!("Moser schedule: {e}")),
                }
            }
        }
    }
    if dc.weak_tests > 0 {
        match verify_weak_solution(p, &last.solution, dc.weak_tests, opts.seed) {
            Ok(w) => dg.weak = Some(w),
            Err(e) => dg.errors.push(format!("weak defect: {e}")),
        }
    }
    if dc.uniqueness_starts >= 2 {
        match multistart_uniqueness_check(p, mesh, last.eps, &cfg.solver, dc.uniqueness_starts, opts.seed) {
            Ok(u) => dg.uniqueness = Some(u),
            Err(e) => dg.errors.push(format!("multistart: {e}")),
        }
    }
    dg
}

/// `solve`: full ladder with diagnostics; writes solution.csv, ladder.csv,
/// moser.csv, envelope.csv and report.txt. Outputs of solved levels are
/// written even when a later level fails.
pub fn solve(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport> {
    let mut timings = Vec::new();
    let t = Instant::now();
    let p = cfg.build_problem()?;
    let mesh = cfg.build_mesh(&p.domain)?;
    let hypotheses = check_problem(&p, &mesh);
    timings.push(("check", t.elapsed()));
    say(opts, format!("mesh: {} vertices, {} cells", mesh.n_vertices(), mesh.n_cells()));

    let t = Instant::now();
    let schedule = cfg.ladder.eps_schedule();
    let (ladder, failure) = run_ladder_partial(&p, &mesh, &schedule, &cfg.solver, &cfg.ladder.config())?;
    timings.push(("ladder", t.elapsed()));

    let t = Instant::now();
    let mut status = match &failure {
        Some(e) => Status::Failed(e.to_string()),
        None if ladder.converged => Status::Ok,
        None => Status::NotConverged,
    };
    let levels = match level_summaries(&p, &ladder, cfg.diagnostics.strip) {
        Ok(l) => l,
        Err(e) => {
            status = Status::Failed(e.to_string());
            Vec::new()
        }
    };
    let diagnostics = if levels.is_empty() { Diagnostics::default() } else { diagnostics(cfg, opts, &p, &ladder, &levels) };
    if status == Status::Ok && !diagnostics.errors.is_empty() {
        status = Status::Failed(diagnostics.errors.join("; "));
    }
    timings.push(("diagnostics", t.elapsed()));

    let report = RunReport {
        hypotheses,
        converged: ladder.converged,
        levels,
        diagnostics,
        timings,
        status,
        out_dir: cfg.out_dir(opts.out.as_deref()),
    };
    write_solve_outputs(cfg, &p, &ladder, &report)?;
    say(opts, render_report(cfg, &p, &report));
    Ok(report)
}

fn write_solve_outputs(cfg: &RunConfig, p: &SingularProblem, ladder: &SolveLadder, r: &RunReport) -> Result<()> {
    let dir = &r.out_dir;
    output::ensure_dir(dir)?;
    let prec = cfg.output.precision;
    if let Some(last) = ladder.levels.last() {
        output::write_csv(&dir.join("solution.csv"), &["x", "y", "u", "d", "u_over_d"], &output::solution_rows(&last.solution, prec))?;
        if cfg.output.mesh {
            let mesh = last.solution.mesh();
            output::write_csv(&dir.join("vertices.csv"), &["vertex", "x", "y", "boundary"], &output::vertex_rows(mesh, prec))?;
            output::write_csv(&dir.join("cells.csv"), &["v0", "v1", "v2"], &output::mesh_rows(mesh))?;
        }
    }
    let rows: Vec<Vec<String>> = r
        .levels
        .iter()
        .map(|l| {
            vec![
                num(l.eps, prec),
                l.iterations.to_string(),
                num(l.residual, prec),
                num(l.max_norm, prec),
                opt(l.cauchy_max, prec),
                opt(l.cauchy_grad, prec),
                num(l.c_fit, prec),
                num(l.power_seminorm, prec),
                num(l.grad_norm, prec),
            ]
        })
        .collect();
    output::write_csv(
        &dir.join("ladder.csv"),
        &["eps", "newton_iterations", "residual", "max_norm", "cauchy_max", "cauchy_grad", "c_fit", "power_seminorm", "grad_luxemburg_norm"],
        &rows,
    )?;
    if let Some((_, s)) = &r.diagnostics.moser {
        write_moser_csv(&dir.join("moser.csv"), s, prec)?;
    }
    if let Some(e) = &r.diagnostics.envelope {
        let rows: Vec<Vec<String>> = e
            .levels
            .iter()
            .flat_map(|l| {
                l.norms
                    .iter()
                    .map(move |(k, b, ln_n, ln_u)| vec![num(l.eps, prec), k.to_string(), num(*b, prec), num(*ln_n, prec), num(*ln_u, prec)])
            })
            .collect();
        output::write_csv(&dir.join("envelope.csv"), &["eps", "k", "beta_k", "log_norm_normalized", "log_norm"], &rows)?;
    }
    output::write_text(&dir.join("report.txt"), &render_report(cfg, p, r))
}

pub fn write_moser_csv(path: &std::path::Path, s: &MoserSchedule, prec: usize) -> Result<()> {
    let rows: Vec<Vec<String>> = s
        .rows()
        .into_iter()
        .map(|(k, b, bs, l, f, r)| vec![k.to_string(), num(b, prec), num(bs, prec), num(l, prec), num(f, prec), num(r, prec)])
        .collect();
    output::write_csv(path, &["k", "beta_k", "beta_k_star", "lambda_k", "F_k", "F_k_over_beta_k"], &rows)
}

pub fn render_report(cfg: &RunConfig, p: &SingularProblem, r: &RunReport) -> String {
    let mut s = describe(cfg, p);
    s.push_str("\n== hypotheses ==\n");
    s.push_str(&r.hypotheses.summary());
    let applicable: Vec<&str> = r.hypotheses.applicable_theorems().iter().map(|k| k.label()).collect();
    let _ = writeln!(s, "applicable conclusions: {}", if applicable.is_empty() { "none".to_string() } else { applicable.join("; ") });
    s.push_str("\n== ladder ==\n");
    let _ = writeln!(s, "levels solved: {}, converged: {}", r.levels.len(), r.converged);
    if let Some(l) = r.levels.last() {
        let _ = writeln!(s, "final eps = {:e}, max u = {:.8}, residual = {:e}, C_fit = {:.6}", l.eps, l.max_norm, l.residual, l.c_fit);
    }
    let dg = &r.diagnostics;
    if let Some(m) = dg.extrapolated_max {
        let _ = writeln!(s, "extrapolated max norm at eps -> 0: {m:.8}");
    }
    s.push_str("\n== diagnostics ==\n");
    if let Some(c) = &dg.comparison {
        let _ = writeln!(s, "comparison chain: worst margin {:e} (threshold {:e}) at level {}, vertex {}", c.worst_margin, c.threshold, c.worst_level, c.worst_node);
    }
    if let (Some(sp), Some(c)) = (dg.c_fit_spread, dg.c_fit_min) {
        let _ = writeln!(s, "C_fit over last three levels: min {c:.6}, spread {sp:.3e} (tol {C_FIT_SPREAD_TOL})");
    }
    if let Some(c) = dg.seminorm_change {
        let _ = writeln!(s, "power seminorm final relative change: {c:.3e} (tol {SEMINORM_CHANGE_TOL})");
    }
    match &dg.coercivity {
        Some(Ok(c)) => {
            let _ = writeln!(s, "coercivity radius r0 = {:.6e} (C1 = {:.4e}, C2 = {:.4e})", c.r0, c.c1, c.c2);
        }
        Some(Err(e)) => {
            let _ = writeln!(s, "coercivity radius unavailable: {e}");
        }
        None => {}
    }
    if let Some((c, m)) = &dg.moser {
        let _ = writeln!(
            s,
            "Moser: q = {}, q' = {:.6}, beta1 = {:.6}, delta = {:.6}, k0 = {}, mu = {:.6}, B = {:.6e}\n  constants: |Omega| = {:.6}, |u1|_1 = {:.6e}, |a|_q = {:.6e}, |b|_inf = {:.6e}, c0 = {:.6e}, C = {:.6e}\n  d0 = {:.6}, envelope e^d0 = {:.6e} (non-rigorous: mu is configured)",
            m.q, m.q_prime, m.beta1, m.delta, m.k0, m.mu, m.big_b, c.omega, c.u1_l1, c.a_q, c.b_inf, c.c0, c.c_alpha, m.d0, m.envelope
        );
    }
    if let Some(e) = &dg.envelope {
        if let Some(l) = e.levels.last() {
            let _ = writeln!(s, "  final level: max u = {:.6e}, measured F_k/beta_k = {:.6} vs d0 = {:.6}", l.max_norm, l.final_ratio, e.d0);
        }
    }
    if let Some(w) = &dg.weak {
        let _ = writeln!(s, "weak defect of the singular equation: max {:.3e}, mean {:.3e} over {} tests", w.max_defect, w.mean_defect, w.defects.len());
    }
    if let Some(u) = &dg.uniqueness {
        let _ = writeln!(s, "multistart: {} starts, max discrepancy {:.3e} (threshold {:.1e}), failures {}", u.max_norms.len() + u.failures.len(), u.max_discrepancy, u.threshold, u.failures.len());
    }
    for n in &dg.notes {
        let _ = writeln!(s, "note: {n}");
    }
    for e in &dg.errors {
        let _ = writeln!(s, "error: {e}");
    }
    for (name, ok) in dg.checks() {
        let _ = writeln!(s, "[{}] {name}", if ok { "PASS" } else { "FAIL" });
    }
    s.push_str("\n== timings ==\n");
    for (k, d) in &r.timings {
        let _ = writeln!(s, "{k}: {:.3} s", d.as_secs_f64());
    }
    let _ = writeln!(s, "\nstatus: {}", r.status);
    s
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    pub max_error: f64,
    pub l2_error: f64,
    pub order_max: Option<f64>,
    pub order_l2: Option<f64>,
}

/// ε ladder 1, 0.1, …, down to `eps` (appended if not a decade).
pub fn decade_schedule(eps: f64) -> Vec<f64> {
    let mut s = vec![1.0];
    let mut e = 0.1;
    while e > eps * (1.0 + 1e-12) {
        s.push(e);
        e *= 0.1;
    }
    s.push(eps);
    s
}

/// `study`: manufactured-solution errors on each mesh size, sizes solved in
/// parallel; writes study.csv.
pub fn study(cfg: &RunConfig, opts: &RunOptions, sizes: Option<&[usize]>) -> Result<Vec<StudyRow>> {
    let m = cfg
        .manufactured
        .as_ref()
        .ok_or_else(|| Error::config("manufactured", "the study verb needs a [manufactured] block"))?;
    let sizes: Vec<usize> = sizes.map(<[usize]>::to_vec).unwrap_or_else(|| m.sizes.clone());
    let exact = Expr::parse(&m.exact).map_err(|e| Error::config("manufactured.exact", e.to_string()))?;
    let p = cfg.build_problem()?;
    let schedule = decade_schedule(m.eps);
    let errs: Vec<Result<(usize, f64, f64, f64)>> = sizes
        .par_iter()
        .map(|&n| {
            let mesh = crate::discretization::Mesh::for_domain(&p.domain, 1.0 / n as f64)?.into_shared();
            let ladder = run_ladder(&p, &mesh, &schedule, &cfg.solver, &cfg.ladder.config())?;
            let u = &ladder.last().solution;
            let ex = DiscreteField::from_fn(mesh.clone(), |x, d| exact.eval(x[0], x[1], d));
            let max_err = u.sub(&ex).max_norm();
            let mut l2 = 0.0;
            for c in 0..mesh.n_cells() {
                for q in mesh.quad_points(c) {
                    let e = u.value_at(c, &q.bary) - exact.eval(q.x[0], q.x[1], q.d);
                    l2 += q.weight * e * e;
                }
            }
            Ok((n, mesh.h_max(), max_err, l2.sqrt()))
        })
        .collect();
    let mut rows: Vec<StudyRow> = Vec::new();
    for r in errs {
        let (n, h, max_error, l2_error) = r?;
        let (order_max, order_l2) = match rows.last() {
            Some(prev) => {
                let lh = (prev.h / h).ln();
                (Some((prev.max_error / max_error).ln() / lh), Some((prev.l2_error / l2_error).ln() / lh))
            }
            None => (None, None),
        };
        rows.push(StudyRow { n, h, max_error, l2_error, order_max, order_l2 });
    }
    let dir = cfg.out_dir(opts.out.as_deref());
    output::ensure_dir(&dir)?;
    let prec = cfg.output.precision;
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.h, prec), num(r.max_error, prec), num(r.l2_error, prec), opt(r.order_max, prec), opt(r.order_l2, prec)])
        .collect();
    output::write_csv(&dir.join("study.csv"), &["n", "h", "max_error", "l2_error", "order_max", "order_l2"], &csv)?;
    let mut table = String::from("      n          h      max error       L2 error  order(max)  order(L2)\n");
    for r in &rows {
        let o = |v: Option<f64>| v.map(|x| format!("{x:10.4}")).unwrap_or_else(|| " ".repeat(10));
        let _ = writeln!(table, "{:7} {:10.3e} {:14.6e} {:14.6e}  {}  {}", r.n, r.h, r.max_error, r.l2_error, o(r.order_max), o(r.order_l2));
    }
    say(opts, table);
    Ok(rows)
}
