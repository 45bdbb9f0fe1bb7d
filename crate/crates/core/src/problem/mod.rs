//! Problem data for −div(φ(|∇u|)∇u) = a(x)/u^α + b(x)u^γ with u = 0 on ∂Ω,
//! its ε-regularized family and the hypothesis checker.

mod check;

pub use check::{check_problem, HypothesisReport, ProxyCheck, TheoremKind, Verdict, DIVERGENCE_SHARE, LAYERS};

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::nfunction::NFunction;

/// Bounded domain: an interval or a simple polygon given as a vertex loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { x0: f64, x1: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Domain {
    pub fn unit_interval() -> Self {
        Domain::Interval { x0: 0.0, x1: 1.0 }
    }

    pub fn unit_square() -> Self {
        Domain::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Interval { x0, x1 } if x0 < x1 => Ok(()),
            Domain::Interval { x0, x1 } => Err(Error::Domain(format!("empty interval [{x0}, {x1}]"))),
            Domain::Polygon { vertices } if vertices.len() >= 3 && self.measure() > 0.0 => Ok(()),
            Domain::Polygon { .. } => Err(Error::Domain("polygon needs ≥ 3 vertices and positive area".into())),
        }
    }

    /// Mesh dimension (1 or 2).
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Polygon { .. } => 2,
        }
    }

    /// Length or area.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Interval { x0, x1 } => x1 - x0,
            Domain::Polygon { vertices } => signed_area(vertices).abs(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { x0, x1 } => x1 - x0,
            Domain::Polygon { vertices } => {
                let mut best = 0.0f64;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        best = best.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
                    }
                }
                best
            }
        }
    }

    /// Exact distance to the boundary (clamped at 0 outside).
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match self {
            Domain::Interval { x0, x1 } => (p[0] - x0).min(x1 - p[0]).max(0.0),
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

pub(crate) fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

pub(crate) fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len2 = ex * ex + ey * ey;
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
    };
    let (dx, dy) = (p[0] - a[0] - s * ex, p[1] - a[1] - s * ey);
    (dx * dx + dy * dy).sqrt()
}

/// Where a coefficient field is evaluated: physical point, distance to the
/// boundary, and the enclosing cell (for nodal fields).
#[derive(Debug, Clone, Copy)]
pub struct FieldPoint<'a> {
    pub x: [f64; 2],
    pub d: f64,
    pub nodes: &'a [usize],
    pub bary: [f64; 3],
}

impl<'a> FieldPoint<'a> {
    /// A point with no cell context (nodal fields evaluate to NaN there).
    pub fn at(x: [f64; 2], d: f64) -> Self {
        FieldPoint { x, d, nodes: &[], bary: [0.0; 3] }
    }
}

/// A coefficient field a(x) or b(x).
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    Expr(Expr),
    /// piecewise-linear table in x, constant beyond the ends
    Table1d(Vec<(f64, f64)>),
    /// P1 nodal values on the mesh the problem is solved on
    Nodal(Arc<Vec<f64>>),
    Func(Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::Expr(e) => write!(f, "Expr({e})"),
            ScalarField::Table1d(t) => write!(f, "Table1d({} rows)", t.len()),
            ScalarField::Nodal(v) => write!(f, "Nodal({} values)", v.len()),
            ScalarField::Func(_) => write!(f, "Func"),
        }
    }
}

impl ScalarField {
    pub fn expr(src: &str) -> Result<Self> {
        Ok(ScalarField::Expr(Expr::parse(src)?))
    }

    pub fn func(f: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Func(Arc::new(f))
    }

    /// Two-column CSV (header required) of `x, value`.
    pub fn table_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Domain(format!("{}: bad row {:?}", path.display(), rec)))
            };
            rows.push((parse(0)?, parse(1)?));
        }
        Self::table(rows)
    }

    pub fn table(mut rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("empty coefficient table".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(ScalarField::Table1d(rows))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Constant(c) if *c == 0.0)
    }

    pub fn eval(&self, p: &FieldPoint) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Expr(e) => e.eval(p.x[0], p.x[1], p.d),
            ScalarField::Table1d(rows) => {
                let x = p.x[0];
                let i = rows.partition_point(|r| r.0 <= x);
                if i == 0 {
                    rows[0].1
                } else if i == rows.len() {
                    rows[rows.len() - 1].1
                } else {
                    let (a, b) = (rows[i - 1], rows[i]);
                    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
                }
            }
            ScalarField::Nodal(v) => {
                if p.nodes.is_empty() {
                    return f64::NAN;
                }
                p.nodes.iter().zip(p.bary).map(|(&n, w)| w * v[n]).sum()
            }
            ScalarField::Func(f) => f(p.x, p.d),
        }
    }
}

/// The singular Dirichlet problem with optional convex term b·u^γ.
#[derive(Debug, Clone)]
pub struct SingularProblem {
    pub domain: Domain,
    pub nfun: Arc<NFunction>,
    pub a: ScalarField,
    pub alpha: f64,
    pub b: ScalarField,
    pub gamma: f64,
    /// integrability exponent of b; `None` means b is only known bounded
    pub sigma: Option<f64>,
    /// integrability exponent of a used for the L∞ results
    pub q: Option<f64>,
}

impl SingularProblem {
    /// Pure singular problem (b ≡ 0).
    pub fn new(domain: Domain, nfun: Arc<NFunction>, a: ScalarField, alpha: f64) -> Result<Self> {
        let p = Self {
            domain,
            nfun,
            a,
            alpha,
            b: ScalarField::Constant(0.0),
            gamma: 0.0,
            sigma: None,
            q: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_convex(mut self, b: ScalarField, gamma: f64, sigma: Option<f64>) -> Result<Self> {
        self.b = b;
        self.gamma = gamma;
        self.sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_q(mut self, q: f64) -> Result<Self> {
        self.q = Some(q);
        self.validate()?;
        Ok(self)
    }

    pub fn ell(&self) -> f64 {
        self.nfun.ell()
    }

    pub fn has_convex_term(&self) -> bool {
        !self.b.is_zero()
    }

    /// Structural constraints that do not need a mesh.
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !(self.alpha > 0.0) {
            return Err(Error::Precondition(format!("singular exponent α must be > 0, got {}", self.alpha)));
        }
        if let ScalarField::Constant(c) = self.a {
            if !(c > 0.0) {
                return Err(Error::Precondition(format!("a must be nonnegative and not identically zero, got a ≡ {c}")));
            }
        }
        let ell = self.ell();
        if self.has_convex_term() {
            if let ScalarField::Constant(c) = self.b {
                if c < 0.0 {
                    return Err(Error::Precondition(format!("b must be nonnegative, got b ≡ {c}")));
                }
            }
            if !(self.gamma >= 0.0 && self.gamma < ell - 1.0) {
                return Err(Error::Precondition(format!(
                    "singular-convex existence requires 0 ≤ γ < ℓ − 1, got γ = {}, ℓ − 1 = {}",
                    self.gamma,
                    ell - 1.0
                )));
            }
            if let Some(s) = self.sigma {
                let lo = ell / (ell - self.gamma - 1.0);
                if !(s > lo) {
                    return Err(Error::Precondition(format!(
                        "singular-convex existence requires b ∈ L^σ with σ > ℓ/(ℓ−γ−1) = {lo}, got σ = {s}"
                    )));
                }
            }
        }
        if let Some(q) = self.q {
            let w = self.q_window()?;
            if !w.contains(q) {
                return Err(Error::Precondition(format!("q = {q} outside the admissible window {w}")));
            }
        }
        Ok(())
    }

    /// Window for q at s = α + γ.
    pub fn q_window(&self) -> Result<QWindow> {
        let nf = self.nfun.spec();
        q_window(self.alpha + self.gamma, nf.ell, nf.em, nf.dim_n, self.alpha)
    }

    pub fn regularize(&self, eps: f64) -> Result<RegularizedProblem<'_>> {
        RegularizedProblem::new(self, eps)
    }
}

/// Admissible exponents (q_min, q_max] for a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QWindow {
    pub q_min: f64,
    /// `f64::INFINITY` when the window is open above
    pub q_max: f64,
}

impl QWindow {
    pub fn is_empty(&self) -> bool {
        self.q_min >= self.q_max
    }
    pub fn is_unbounded(&self) -> bool {
        self.q_max.is_infinite()
    }
    pub fn contains(&self, q: f64) -> bool {
        q > self.q_min && q <= self.q_max
    }
}

impl fmt::Display for QWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unbounded() {
            write!(f, "({}, ∞)", self.q_min)
        } else {
            write!(f, "({}, {}]", self.q_min, self.q_max)
        }
    }
}

/// (N/ℓ, q(s)] with q(s) = ℓ*/s for s ≤ 1 and (ℓ* + (α−1)ℓ*/ℓ)/s for s > 1.
pub fn q_window(s: f64, ell: f64, em: f64, dim_n: usize, alpha: f64) -> Result<QWindow> {
    let n = dim_n as f64;
    if ell >= n {
        return Err(Error::Precondition(format!("ℓ* undefined: ℓ = {ell} ≥ N = {dim_n}")));
    }
    if ell > em {
        return Err(Error::Precondition(format!("ℓ = {ell} exceeds m = {em}")));
    }
    if s < 0.0 {
        return Err(Error::Precondition(format!("α + γ must be positive, got {s}")));
    }
    let ls = n * ell / (n - ell);
    let q_max = if s == 0.0 {
        f64::INFINITY
    } else if s <= 1.0 {
        ls / s
    } else {
        (ls + (alpha - 1.0) * ls / ell) / s
    };
    Ok(QWindow { q_min: n / ell, q_max })
}

// min(v, 1/ε) that keeps NaN visible to the assembly checks
fn truncate(v: f64, eps: f64) -> f64 {
    if v.is_nan() {
        v
    } else {
        v.min(1.0 / eps)
    }
}

/// The problem with a and b truncated at 1/ε and the singular term shifted by ε.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedProblem<'a> {
    pub parent: &'a SingularProblem,
    pub eps: f64,
}

impl<'a> RegularizedProblem<'a> {
    pub fn new(parent: &'a SingularProblem, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("regularization ε must be positive and finite, got {eps}")));
        }
        Ok(Self { parent, eps })
    }

    pub fn a_eps(&self, p: &FieldPoint) -> f64 {
        truncate(self.parent.a.eval(p), self.eps)
    }

    pub fn b_eps(&self, p: &FieldPoint) -> f64 {
        if self.parent.b.is_zero() {
            0.0
        } else {
            truncate(self.parent.b.eval(p), self.eps)
        }
    }

    /// a_ε/(|t|+ε)^α + b_ε (t⁺)^γ
    pub fn rhs(&self, a_eps: f64, b_eps: f64, t: f64) -> f64 {
        let sing = a_eps / (t.abs() + self.eps).powf(self.parent.alpha);
        let conv = if b_eps == 0.0 { 0.0 } else { b_eps * t.max(0.0).powf(self.parent.gamma) };
        sing + conv
    }

    /// ∂/∂t of [`rhs`](Self::rhs), with sign(0) = +1.
    pub fn rhs_derivative(&self, a_eps: f64, b_eps: f64, t: f64) -> f64 {
        let alpha = self.parent.alpha;
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        let sing = -alpha * a_eps * sign * (t.abs() + self.eps).powf(-alpha - 1.0);
        let g = self.parent.gamma;
        let conv = if b_eps == 0.0 || t <= 0.0 || g == 0.0 {
            0.0
        } else {
            g * b_eps * t.powf(g - 1.0)
        };
        sing + conv
    }
}
