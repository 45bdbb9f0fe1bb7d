use std::path::PathBuf;

use crate::discretization::DiscreteField;
use crate::solver::NewtonTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A structural hypothesis on φ or on the problem data failed.
    #[error("hypothesis {hypothesis} violated: {detail}")]
    HypothesisViolation { hypothesis: String, detail: String },

    #[error("conjugate is unbounded: root of s*phi(s) = {t} not bracketed below {guard:e}")]
    UnboundedConjugate { t: f64, guard: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("assembly failed on cell {cell}: {detail}")]
    Assembly { cell: usize, detail: String },

    #[error("newton did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
        best: Box<DiscreteField>,
        trace: NewtonTrace,
    },

    #[error("converged iterate is not positive: u[{vertex}] = {value:e}")]
    PositivityViolation { vertex: usize, value: f64 },

    #[error("ladder level eps = {eps:e} failed: {source}")]
    Level {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("coercivity certificate failed: {0}")]
    Certificate(String),

    #[error("moser iteration does not close: {0}")]
    Moser(String),

    #[error("expression error at column {col}: {msg}")]
    Expr { col: usize, msg: String },

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn hypothesis(h: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::HypothesisViolation {
            hypothesis: h.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
