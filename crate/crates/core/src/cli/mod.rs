//! Configuration-driven runs behind the `singular-phi` binary: TOML config,
//! the check/solve/study/moser verbs and their CSV/text outputs.

mod config;
mod output;
mod run;

pub use config::{
    manufactured_coefficient, DiagnosticsBlock, LadderBlock, ManufacturedBlock, MeshBlock, OutputBlock, ProblemBlock, RunConfig,
};
pub use run::{
    check, decade_schedule, render_report, solve, study, write_moser_csv, Diagnostics, LevelSummary, RunOptions, RunReport, Status,
    StudyRow, C_FIT_SPREAD_TOL, SEMINORM_CHANGE_TOL,
};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimates::{sharp_sobolev_constant, MoserSchedule};

#[derive(Debug, Parser)]
#[command(name = "singular-phi", version, about = "Singular quasilinear Dirichlet problems: hypothesis checks, ε-ladder solves, estimate diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// output directory (default: `output.dir`, else `out/` beside the config)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the hypotheses and list the conclusions that apply.
    Check(#[command(flatten)] Common),
    /// Run the ε-ladder and all diagnostics.
    Solve(#[command(flatten)] Common),
    /// Manufactured-solution convergence table.
    Study {
        #[command(flatten)]
        common: Common,
        /// cell counts per unit length, overriding `manufactured.sizes`
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Moser exponent schedule and envelope from explicit constants.
    Moser {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        m: MoserArgs,
    },
}

#[derive(Debug, Args, Clone)]
pub struct MoserArgs {
    /// lower index ℓ (taken from --config when omitted)
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub dim_n: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub k_max: usize,
    /// embedding constant (default: sharp Sobolev constant)
    #[arg(long)]
    pub mu: Option<f64>,
    /// the constant B of the Moser step
    #[arg(long, default_value_t = 1.0)]
    pub big_b: f64,
    /// F₁ = β₁ ln‖u‖_{β₁}
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub f1: f64,
}

fn options(c: &Common) -> RunOptions {
    RunOptions {
        out: c.out.clone(),
        quiet: c.quiet,
        seed: c.seed,
    }
}

fn load(c: &Common) -> Result<RunConfig> {
    let path = c.config.as_ref().ok_or_else(|| Error::config("--config", "this verb needs a config file"))?;
    RunConfig::from_path(path)
}

/// `moser`: schedule only. Exponents come from flags, falling back to the config.
pub fn moser(cfg: Option<&RunConfig>, m: &MoserArgs, opts: &RunOptions) -> Result<MoserSchedule> {
    let from_cfg = match cfg {
        Some(c) => Some((c.nfunction_spec()?, c.problem.alpha, c.problem.q)),
        None => None,
    };
    let need = |name: &str| Error::config(format!("--{name}"), "required without --config");
    let ell = m.ell.or(from_cfg.as_ref().map(|f| f.0.ell)).ok_or_else(|| need("ell"))?;
    let dim_n = m.dim_n.or(from_cfg.as_ref().map(|f| f.0.dim_n)).ok_or_else(|| need("dim-n"))?;
    let alpha = m.alpha.or(from_cfg.as_ref().map(|f| f.1)).ok_or_else(|| need("alpha"))?;
    let q = m.q.or(from_cfg.as_ref().and_then(|f| f.2)).ok_or_else(|| need("q"))?;
    let mu = match m.mu {
        Some(mu) => mu,
        None => sharp_sobolev_constant(ell, dim_n)?,
    };
    let s = MoserSchedule::from_exponents(ell, dim_n, alpha, q, m.k_max, mu, m.big_b, m.f1)?;
    let dir = match (opts.out.as_ref(), cfg) {
        (Some(o), _) => o.clone(),
        (None, Some(c)) => c.out_dir(None),
        (None, None) => PathBuf::from("out"),
    };
    output::ensure_dir(&dir)?;
    let prec = cfg.map_or(10, |c| c.output.precision);
    write_moser_csv(&dir.join("moser.csv"), &s, prec)?;
    if !opts.quiet {
        println!(
            "q' = {:.6}  beta1 = {:.6}  delta = {:.6}  k0 = {}  mu = {:.6}\nsum n/delta^n = {:.6}  d0 = {:.6}  envelope = {:.6e}",
            s.q_prime,
            s.beta1,
            s.delta,
            s.k0,
            s.mu,
            s.series_n_over_delta(),
            s.d0,
            s.envelope
        );
        println!("{:>4} {:>14} {:>14} {:>14} {:>14} {:>12}", "k", "beta_k", "beta_k*", "lambda_k", "F_k", "F_k/beta_k");
        for (k, b, bs, l, f, r) in s.rows() {
            println!("{k:>4} {b:>14.6e} {bs:>14.6e} {l:>14.6e} {f:>14.6e} {r:>12.6}");
        }
    }
    Ok(s)
}

/// Runs the CLI; returns the process exit code (0 ok, 1 error, 2 run finished
/// without converging or with a failed level).
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Check(c) => load(c).and_then(|cfg| check(&cfg, &options(c))).map(|_| 0),
        Command::Solve(c) => load(c).and_then(|cfg| solve(&cfg, &options(c))).map(|r| match r.status {
            Status::Ok => 0,
            _ => 2,
        }),
        Command::Study { common, sizes } => load(common).and_then(|cfg| study(&cfg, &options(common), sizes.as_deref())).map(|_| 0),
        Command::Moser { common, m } => {
            let cfg = common.config.as_ref().map(|p| RunConfig::from_path(p)).transpose();
            cfg.and_then(|cfg| moser(cfg.as_ref(), m, &options(common))).map(|_| 0)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
