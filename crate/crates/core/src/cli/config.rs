use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::discretization::Mesh;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::nfunction::{MonotoneTable, NFunctionSpec, PhiFunction, CATALOG};
use crate::problem::{Domain, ScalarField, SingularProblem};
use crate::solver::{LadderConfig, NewtonConfig, Spacing};

/// A run configuration, read from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemBlock,
    #[serde(default)]
    pub mesh: MeshBlock,
    #[serde(default)]
    pub solver: NewtonConfig,
    #[serde(default)]
    pub ladder: LadderBlock,
    #[serde(default)]
    pub diagnostics: DiagnosticsBlock,
    #[serde(default)]
    pub output: OutputBlock,
    pub manufactured: Option<ManufacturedBlock>,
    /// directory relative paths are resolved against
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    /// "interval", "square" or "polygon"
    #[serde(default = "default_domain")]
    pub domain: String,
    pub interval: Option<[f64; 2]>,
    pub vertices: Option<Vec<[f64; 2]>>,
    /// catalog key, e.g. "p-laplace(2)"
    pub phi: Option<String>,
    /// two-column CSV of (t, φ(t)); needs `ell` and `em`
    pub phi_table: Option<PathBuf>,
    pub ell: Option<f64>,
    pub em: Option<f64>,
    pub dim_n: Option<usize>,
    /// expression in x, y, d
    pub a: Option<String>,
    /// 1D table of (x, a(x))
    pub a_table: Option<PathBuf>,
    pub alpha: f64,
    pub b: Option<String>,
    #[serde(default)]
    pub gamma: f64,
    pub sigma: Option<f64>,
    pub q: Option<f64>,
}

fn default_domain() -> String {
    "interval".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshBlock {
    /// cells per unit length; ignored when `h` is set
    pub n: usize,
    pub h: Option<f64>,
}

impl Default for MeshBlock {
    fn default() -> Self {
        Self { n: 64, h: None }
    }
}

impl MeshBlock {
    pub fn h(&self) -> f64 {
        self.h.unwrap_or(1.0 / self.n as f64)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderBlock {
    pub n_max: usize,
    pub spacing: Spacing,
    pub tol_max: f64,
    pub tol_grad: f64,
    /// explicit ε values, overriding n_max/spacing
    pub schedule: Option<Vec<f64>>,
}

impl Default for LadderBlock {
    fn default() -> Self {
        let c = LadderConfig::default();
        Self {
            n_max: c.n_max,
            spacing: c.spacing,
            tol_max: c.tol_max,
            tol_grad: c.tol_grad,
            schedule: None,
        }
    }
}

impl LadderBlock {
    pub fn config(&self) -> LadderConfig {
        LadderConfig {
            n_max: self.n_max,
            spacing: self.spacing,
            tol_max: self.tol_max,
            tol_grad: self.tol_grad,
        }
    }

    pub fn eps_schedule(&self) -> Vec<f64> {
        self.schedule.clone().unwrap_or_else(|| self.config().schedule())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsBlock {
    /// length of the Moser schedule
    pub k_max: usize,
    /// embedding constant; default is the sharp Sobolev constant
    pub mu: Option<f64>,
    /// boundary strip width for the lower-bound fit; default 2h
    pub strip: Option<f64>,
    pub weak_tests: usize,
    /// 0 disables the multistart check
    pub uniqueness_starts: usize,
    pub moser: bool,
    pub coercivity: bool,
}

impl Default for DiagnosticsBlock {
    fn default() -> Self {
        Self {
            k_max: 20,
            mu: None,
            strip: None,
            weak_tests: 8,
            uniqueness_starts: 0,
            moser: true,
            coercivity: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
    /// significant digits after the point in CSV output
    pub precision: usize,
    /// also write mesh.csv (cells)
    pub mesh: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: None,
            precision: 10,
            mesh: false,
        }
    }
}

/// A known exact solution u*; a is derived from it.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedBlock {
    pub exact: String,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// smallest ε of the decade ladder used per mesh
    #[serde(default = "default_manufactured_eps")]
    pub eps: f64,
    /// step of the nested central differences
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_sizes() -> Vec<usize> {
    vec![16, 32, 64]
}
fn default_manufactured_eps() -> f64 {
    1e-8
}
fn default_fd_step() -> f64 {
    1e-4
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&src)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Parses and validates; errors name the offending field path.
    pub fn from_toml(src: &str) -> Result<Self> {
        let de = toml::Deserializer::new(src);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { String::new() } else { path }, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pb = &self.problem;
        if pb.phi.is_none() && pb.phi_table.is_none() {
            return Err(Error::config("problem.phi", format!("missing phi key; catalog: {}", CATALOG.join(", "))));
        }
        if pb.a.is_some() == pb.a_table.is_some() && self.manufactured.is_none() {
            return Err(Error::config("problem.a", "give exactly one of `a` and `a_table`"));
        }
        if !(pb.alpha > 0.0) {
            return Err(Error::config("problem.alpha", "must be positive"));
        }
        if self.mesh.n == 0 || self.mesh.h.is_some_and(|h| !(h > 0.0)) {
            return Err(Error::config("mesh", "resolution must be positive"));
        }
        self.solver.validate()?;
        let lb = &self.ladder;
        if !(lb.tol_max > 0.0) {
            return Err(Error::config("ladder.tol_max", "must be positive"));
        }
        if !(lb.tol_grad > 0.0) {
            return Err(Error::config("ladder.tol_grad", "must be positive"));
        }
        if lb.n_max == 0 {
            return Err(Error::config("ladder.n_max", "must be at least 1"));
        }
        if let Some(s) = &lb.schedule {
            if s.is_empty() || s.iter().any(|e| !(*e > 0.0)) || s.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::config("ladder.schedule", "must be a nonempty strictly decreasing list of positive ε"));
            }
        }
        if self.diagnostics.k_max == 0 {
            return Err(Error::config("diagnostics.k_max", "must be at least 1"));
        }
        if self.diagnostics.mu.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::config("diagnostics.mu", "must be positive"));
        }
        if self.diagnostics.uniqueness_starts == 1 {
            return Err(Error::config("diagnostics.uniqueness_starts", "use 0 to disable, or at least 2"));
        }
        if self.output.precision == 0 || self.output.precision > 17 {
            return Err(Error::config("output.precision", "must lie in 1..=17"));
        }
        if let Some(m) = &self.manufactured {
            Expr::parse(&m.exact).map_err(|e| Error::config("manufactured.exact", e.to_string()))?;
            if m.sizes.is_empty() || m.sizes.contains(&0) {
                return Err(Error::config("manufactured.sizes", "must be a nonempty list of positive cell counts"));
            }
            if !(m.eps > 0.0 && m.eps < 1.0) {
                return Err(Error::config("manufactured.eps", "must lie in (0, 1)"));
            }
            if !(m.fd_step > 0.0) {
                return Err(Error::config("manufactured.fd_step", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain> {
        let pb = &self.problem;
        let d = match pb.domain.as_str() {
            "interval" => {
                let [x0, x1] = pb.interval.unwrap_or([0.0, 1.0]);
                Domain::Interval { x0, x1 }
            }
            "square" => Domain::unit_square(),
            "polygon" => Domain::Polygon {
                vertices: pb
                    .vertices
                    .clone()
                    .ok_or_else(|| Error::config("problem.vertices", "required for a polygon domain"))?,
            },
            other => {
                return Err(Error::config(
                    "problem.domain",
                    format!("unknown domain `{other}`; expected interval, square or polygon"),
                ))
            }
        };
        d.validate().map_err(|e| Error::config("problem.domain", e.to_string()))?;
        Ok(d)
    }

    pub fn nfunction_spec(&self) -> Result<NFunctionSpec> {
        let pb = &self.problem;
        let at = |path: &str| {
            let path = path.to_string();
            move |e: Error| match e {
                Error::Config { .. } => e,
                other => Error::config(path.clone(), other.to_string()),
            }
        };
        if let Some(table) = &pb.phi_table {
            let t = MonotoneTable::from_csv(&self.resolve(table)).map_err(at("problem.phi_table"))?;
            let (ell, em) = match (pb.ell, pb.em) {
                (Some(l), Some(m)) => (l, m),
                _ => return Err(Error::config("problem.ell", "a tabulated phi needs `ell` and `em`")),
            };
            let n = pb.dim_n.unwrap_or(((em.floor() as usize) + 1).max(2));
            return NFunctionSpec::new(PhiFunction::Tabulated(t), ell, em, n).map_err(at("problem.phi_table"));
        }
        let key = pb.phi.as_deref().expect("validated");
        NFunctionSpec::from_key(key, pb.dim_n).map_err(at("problem.phi"))
    }

    fn field(&self, src: &str, path: &str) -> Result<ScalarField> {
        ScalarField::expr(src).map_err(|e| Error::config(path, e.to_string()))
    }

    /// The problem; with a [manufactured] block and no explicit a, the
    /// coefficient is derived from the exact solution.
    pub fn build_problem(&self) -> Result<SingularProblem> {
        let pb = &self.problem;
        let domain = self.domain()?;
        let nf = Arc::new(self.nfunction_spec()?.build().map_err(|e| Error::config("problem.phi", e.to_string()))?);
        let b = match &pb.b {
            Some(src) => Some(self.field(src, "problem.b")?),
            None => None,
        };
        let a = if let Some(src) = &pb.a {
            self.field(src, "problem.a")?
        } else if let Some(t) = &pb.a_table {
            ScalarField::table_csv(&self.resolve(t)).map_err(|e| Error::config("problem.a_table", e.to_string()))?
        } else {
            let m = self.manufactured.as_ref().expect("validated");
            let exact = Expr::parse(&m.exact).map_err(|e| Error::config("manufactured.exact", e.to_string()))?;
            manufactured_coefficient(exact, nf.clone(), pb.alpha, b.clone(), pb.gamma, domain.dim(), m.fd_step)
        };
        let mut p = SingularProblem::new(domain, nf, a, pb.alpha).map_err(|e| Error::config("problem.a", e.to_string()))?;
        if let Some(b) = b {
            p = p.with_convex(b, pb.gamma, pb.sigma).map_err(|e| Error::config("problem.gamma", e.to_string()))?;
        } else if pb.gamma != 0.0 || pb.sigma.is_some() {
            return Err(Error::config("problem.b", "`gamma`/`sigma` given without a convex coefficient `b`"));
        }
        if let Some(q) = pb.q {
            p = p.with_q(q).map_err(|e| Error::config("problem.q", e.to_string()))?;
        }
        Ok(p)
    }

    pub fn build_mesh(&self, domain: &Domain) -> Result<Arc<Mesh>> {
        Ok(Mesh::for_domain(domain, self.mesh.h())?.into_shared())
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.output.dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(d)) => self.resolve(d),
            (None, None) => self.base_dir.join("out"),
        }
    }
}

/// a = (−div(φ(|∇u*|)∇u*) − b·u*^γ)·u*^α by nested central differences.
pub fn manufactured_coefficient(
    exact: Expr,
    nf: Arc<crate::nfunction::NFunction>,
    alpha: f64,
    b: Option<ScalarField>,
    gamma: f64,
    dim: usize,
    h: f64,
) -> ScalarField {
    let inner = h * 1e-1;
    ScalarField::func(move |x, d| {
        let u = |p: [f64; 2]| exact.eval(p[0], p[1], d);
        let grad = |p: [f64; 2]| -> [f64; 2] {
            let gx = (u([p[0] + inner, p[1]]) - u([p[0] - inner, p[1]])) / (2.0 * inner);
            let gy = if dim == 2 {
                (u([p[0], p[1] + inner]) - u([p[0], p[1] - inner])) / (2.0 * inner)
            } else {
                0.0
            };
            [gx, gy]
        };
        let flux = |p: [f64; 2], k: usize| -> f64 {
            let g = grad(p);
            let t = (g[0] * g[0] + g[1] * g[1]).sqrt();
            if t == 0.0 {
                0.0
            } else {
                nf.phi(t) * g[k]
            }
        };
        let mut div = (flux([x[0] + h, x[1]], 0) - flux([x[0] - h, x[1]], 0)) / (2.0 * h);
        if dim == 2 {
            div += (flux([x[0], x[1] + h], 1) - flux([x[0], x[1] - h], 1)) / (2.0 * h);
        }
        let ux = u(x).max(0.0);
        let convex = b.as_ref().map_or(0.0, |b| b.eval(&crate::problem::FieldPoint::at(x, d)) * ux.powf(gamma));
        (-div - convex) * ux.powf(alpha)
    })
}
