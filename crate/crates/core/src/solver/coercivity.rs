use crate::discretization::Mesh;
use crate::error::{Error, Result};
use crate::nfunction::luxemburg_norm;
use crate::problem::RegularizedProblem;

const R_MAX: f64 = 1e12;
const R_TOL: f64 = 1e-10;

/// Radius r0 > 1 such that the discrete operator is coercive outside the ball
/// of radius r0 in the gradient Luxemburg norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityCertificate {
    pub r0: f64,
    pub c1: f64,
    pub c2: f64,
    /// ℓ·min{r0^ℓ, r0^m} − C1·r0 − C2·r0^{γ+1}
    pub margin: f64,
    pub ell: f64,
    pub em: f64,
    pub gamma: f64,
}

impl CoercivityCertificate {
    /// ℓ·min{r^ℓ, r^m} − C1·r − C2·r^{γ+1}.
    pub fn margin_at(&self, r: f64) -> f64 {
        margin(self.ell, self.em, self.gamma, self.c1, self.c2, r)
    }

    /// Finds r0 for given constants: the largest root above 1 of the margin
    /// (so the margin is positive on (r0, 1e12]), or 1 + tol when the margin
    /// is already positive at every scanned radius.
    pub fn from_constants(ell: f64, em: f64, gamma: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(gamma + 1.0 < ell) {
            return Err(Error::Precondition(format!("coercivity needs γ + 1 < ℓ, got γ = {gamma}, ℓ = {ell}")));
        }
        let f = |r: f64| margin(ell, em, gamma, c1, c2, r);
        if !(f(R_MAX) > 0.0) {
            return Err(Error::Certificate(format!("margin not positive anywhere in [1, {R_MAX:e}] (C1 = {c1:e}, C2 = {c2:e})")));
        }
        // geometric scan for the last nonpositive sample
        let mut last_bad: Option<f64> = if f(1.0) > 0.0 { None } else { Some(1.0) };
        let mut r = 1.0;
        while r < R_MAX {
            r = (r * 1.05).min(R_MAX);
            if !(f(r) > 0.0) {
                last_bad = Some(r);
            }
        }
        let r0 = match last_bad {
            None => 1.0 + R_TOL,
            Some(lo) => {
                let (mut lo, mut hi) = (lo, (lo * 1.05).min(R_MAX));
                while hi - lo > R_TOL * hi {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        };
        Ok(Self {
            r0,
            c1,
            c2,
            margin: f(r0),
            ell,
            em,
            gamma,
        })
    }
}

fn margin(ell: f64, em: f64, gamma: f64, c1: f64, c2: f64, r: f64) -> f64 {
    ell * r.powf(ell).min(r.powf(em)) - c1 * r - c2 * r.powf(gamma + 1.0)
}

/// Certificate for one ε-level with constants measured on `mesh`:
///
/// * C1 = ε^{−α} · 2‖a_ε‖_Φ̃ · 2d_Ω (Orlicz–Hölder, then ‖u‖_Φ ≤ 2d_Ω‖∇u‖_Φ),
/// * C2 = ‖b_ε‖_∞ · K^{γ+1} with K = |Ω|^{1/(γ+1)−1/ℓ} (1/Φ(1) + |Ω|)^{1/ℓ} · 2d_Ω
///   bounding ‖u‖_{γ+1} by ‖∇u‖_Φ,
///
/// where d_Ω is the diameter of the domain.
pub fn coercivity_radius(rp: &RegularizedProblem, mesh: &Mesh) -> Result<CoercivityCertificate> {
    let p = rp.parent;
    let nf = &p.nfun;
    let (ell, em, gamma) = (nf.ell(), nf.em(), p.gamma);
    if !(gamma + 1.0 < ell) {
        return Err(Error::Precondition(format!("coercivity needs γ + 1 < ℓ, got γ = {gamma}, ℓ = {ell}")));
    }
    let mut a_vals = Vec::new();
    let mut weights = Vec::new();
    let mut b_inf = 0.0f64;
    for c in 0..mesh.n_cells() {
        for q in mesh.quad_points(c) {
            let fp = mesh.field_point(c, q);
            a_vals.push(rp.a_eps(&fp));
            weights.push(q.weight);
            b_inf = b_inf.max(rp.b_eps(&fp).abs());
        }
    }
    let diam = mesh.domain().diameter();
    let omega = mesh.domain().measure();
    let a_norm = luxemburg_norm(&a_vals, &weights, |t| nf.conjugate(t));
    let c1 = rp.eps.powf(-p.alpha) * 2.0 * a_norm * 2.0 * diam;
    let k = omega.powf(1.0 / (gamma + 1.0) - 1.0 / ell) * (1.0 / nf.big_phi(1.0) + omega).powf(1.0 / ell) * 2.0 * diam;
    let c2 = b_inf * k.powf(gamma + 1.0);
    CoercivityCertificate::from_constants(ell, em, gamma, c1, c2)
}
