//! N-function calculus for Φ(t) = ∫₀ᵗ sφ(s) ds.
//!
//! [`NFunction`] is built once from an [`NFunctionSpec`]: it tabulates Φ on a
//! log-spaced checkpoint grid so that later evaluations only integrate one short
//! panel. Everything is immutable after construction and can be shared across
//! threads.

mod catalog;
mod growth;
mod norms;
mod table;

pub use catalog::{PhiFunction, CATALOG};
pub use growth::{check_hypotheses, zeta_sandwich_check, GrowthReport, IndexRange, SandwichReport, SandwichViolation};
pub use norms::luxemburg_norm;
pub use table::MonotoneTable;

use crate::error::{Error, Result};
use crate::quad;

/// φ together with its growth indices and the space dimension N.
#[derive(Debug, Clone)]
pub struct NFunctionSpec {
    pub phi: PhiFunction,
    /// lower index ℓ
    pub ell: f64,
    /// upper index m
    pub em: f64,
    /// space dimension N entering ℓ* and Φ*
    pub dim_n: usize,
    /// relative tolerance of the Φ quadrature
    pub quad_tol: f64,
}

impl NFunctionSpec {
    pub fn new(phi: PhiFunction, ell: f64, em: f64, dim_n: usize) -> Result<Self> {
        let spec = Self {
            phi,
            ell,
            em,
            dim_n,
            quad_tol: 1e-13,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Catalog entry with its natural indices; `dim_n` defaults to the smallest
    /// integer N ≥ 2 with m < N.
    pub fn from_key(key: &str, dim_n: Option<usize>) -> Result<Self> {
        let phi = PhiFunction::from_key(key)?;
        let (ell, em) = phi.natural_indices().expect("catalog entries carry indices");
        Self::new(phi, ell, em, dim_n.unwrap_or_else(|| default_dim(em)))
    }

    pub fn validate(&self) -> Result<()> {
        let (l, m, n) = (self.ell, self.em, self.dim_n as f64);
        if !(self.dim_n >= 2 && 1.0 < l && l <= m && m < n) {
            return Err(Error::hypothesis(
                "(φ3)",
                format!("indices must satisfy 1 < ℓ ≤ m < N, got ℓ={l}, m={m}, N={}", self.dim_n),
            ));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::Domain("quad_tol must be positive".into()));
        }
        Ok(())
    }

    /// Sobolev exponent ℓ* = Nℓ/(N − ℓ).
    pub fn ell_star(&self) -> f64 {
        let n = self.dim_n as f64;
        n * self.ell / (n - self.ell)
    }

    pub fn zeta(&self) -> ZetaBounds {
        ZetaBounds {
            ell: self.ell,
            em: self.em,
        }
    }

    pub fn build(self) -> Result<NFunction> {
        NFunction::new(self)
    }
}

pub(crate) fn default_dim(em: f64) -> usize {
    ((em.floor() as usize) + 1).max(2)
}

/// The four comparison monomials of the growth sandwiches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaBounds {
    pub ell: f64,
    pub em: f64,
}

impl ZetaBounds {
    pub fn zeta0(&self, t: f64) -> f64 {
        t.powf(self.ell).min(t.powf(self.em))
    }
    pub fn zeta1(&self, t: f64) -> f64 {
        t.powf(self.ell).max(t.powf(self.em))
    }
    /// conjugate exponents ℓ̃ = ℓ/(ℓ−1), m̃ = m/(m−1)
    pub fn conjugate_exponents(&self) -> (f64, f64) {
        (self.ell / (self.ell - 1.0), self.em / (self.em - 1.0))
    }
    pub fn zeta2(&self, t: f64) -> f64 {
        let (lt, mt) = self.conjugate_exponents();
        t.powf(lt).min(t.powf(mt))
    }
    pub fn zeta3(&self, t: f64) -> f64 {
        let (lt, mt) = self.conjugate_exponents();
        t.powf(lt).max(t.powf(mt))
    }
}

const GRID_PER_DECADE: usize = 16;
const GRID_MIN_EXP: f64 = -12.0;
const GRID_DECADES: usize = 24;
const CONJUGATE_GUARD: f64 = 1e150;

/// Probe grid used for hypothesis checks: 200 log-spaced points on [1e-6, 1e6].
pub fn probe_grid() -> Vec<f64> {
    (0..200).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 199.0)).collect()
}

/// A constructed N-function with Φ, Φ⁻¹, Φ̃ and Φ*⁻¹.
#[derive(Debug, Clone)]
pub struct NFunction {
    spec: NFunctionSpec,
    grid: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NFunction {
    /// Builds the checkpoint table. Fails when tφ(t) is not strictly increasing
    /// on the probe grid.
    pub fn new(spec: NFunctionSpec) -> Result<Self> {
        spec.validate()?;
        let probes = probe_grid();
        for w in probes.windows(2) {
            let (f0, f1) = (w[0] * spec.phi.value(w[0]), w[1] * spec.phi.value(w[1]));
            if !(f1 > f0) {
                return Err(Error::hypothesis(
                    "(φ2)",
                    format!("t·φ(t) not strictly increasing between t={:.3e} ({f0:e}) and t={:.3e} ({f1:e})", w[0], w[1]),
                ));
            }
        }
        let n = GRID_PER_DECADE * GRID_DECADES;
        let grid: Vec<f64> = (0..=n)
            .map(|k| 10f64.powf(GRID_MIN_EXP + k as f64 / GRID_PER_DECADE as f64))
            .collect();
        let flux = |s: f64| s * spec.phi.value(s);
        let mut cumulative = Vec::with_capacity(grid.len());
        let (head, _) = quad::integrate(&flux, 0.0, grid[0], spec.quad_tol, 0.0);
        cumulative.push(head);
        for k in 0..n {
            let (seg, _) = quad::integrate(&flux, grid[k], grid[k + 1], spec.quad_tol, 0.0);
            cumulative.push(cumulative[k] + seg);
        }
        Ok(Self { spec, grid, cumulative })
    }

    pub fn spec(&self) -> &NFunctionSpec {
        &self.spec
    }

    pub fn ell(&self) -> f64 {
        self.spec.ell
    }

    pub fn em(&self) -> f64 {
        self.spec.em
    }

    pub fn dim_n(&self) -> usize {
        self.spec.dim_n
    }

    pub fn ell_star(&self) -> f64 {
        self.spec.ell_star()
    }

    pub fn zeta(&self) -> ZetaBounds {
        self.spec.zeta()
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.spec.phi.value(t)
    }

    pub fn phi_derivative(&self, t: f64) -> f64 {
        self.spec.phi.derivative(t)
    }

    /// t·φ(t), extended as an odd function.
    pub fn flux(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            t * self.spec.phi.value(t.abs())
        }
    }

    fn integral_flux(&self, a: f64, b: f64) -> f64 {
        let flux = |s: f64| s * self.spec.phi.value(s);
        quad::integrate(&flux, a, b, self.spec.quad_tol, 0.0).0
    }

    /// Φ(t), even in t.
    pub fn big_phi(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return 0.0;
        }
        let last = self.grid.len() - 1;
        if t <= self.grid[0] {
            return self.integral_flux(0.0, t);
        }
        if t >= self.grid[last] {
            // beyond the table: decade-sized panels
            let mut acc = self.cumulative[last];
            let mut a = self.grid[last];
            while a < t {
                let b = (a * 10.0).min(t);
                acc += self.integral_flux(a, b);
                a = b;
                if !acc.is_finite() {
                    break;
                }
            }
            return acc;
        }
        let pos = ((t.log10() - GRID_MIN_EXP) * GRID_PER_DECADE as f64).floor();
        let k = (pos.max(0.0) as usize).min(last - 1);
        self.cumulative[k] + self.integral_flux(self.grid[k], t)
    }

    /// Φ⁻¹(s) for s ≥ 0, by bisection to 1e-12 relative.
    pub fn inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let last = self.grid.len() - 1;
        let (lo, hi) = if s <= self.cumulative[0] {
            (0.0, self.grid[0])
        } else if s >= self.cumulative[last] {
            match quad::bracket_increasing(&|t| self.big_phi(t), s, self.grid[last], f64::MAX) {
                Some(b) => b,
                None => return f64::INFINITY,
            }
        } else {
            let k = self.cumulative.partition_point(|&c| c <= s);
            (self.grid[k - 1], self.grid[k])
        };
        quad::bisect_increasing(|t| self.big_phi(t), s, lo, hi, 1e-12)
    }

    /// The maximiser s* of ts − Φ(s), i.e. the root of sφ(s) = t.
    pub fn conjugate_argmax(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if t == 0.0 {
            return Ok(0.0);
        }
        let flux = |s: f64| self.flux(s);
        let (lo, hi) = quad::bracket_increasing(&flux, t, 1.0, CONJUGATE_GUARD).ok_or(Error::UnboundedConjugate {
            t,
            guard: CONJUGATE_GUARD,
        })?;
        Ok(quad::bisect_increasing(flux, t, lo, hi, 1e-16))
    }

    /// Young conjugate Φ̃(t) = sup_s (ts − Φ(s)).
    pub fn try_conjugate(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        let s = self.conjugate_argmax(t)?;
        Ok((t * s - self.big_phi(s)).max(0.0))
    }

    /// Like [`try_conjugate`](Self::try_conjugate) but maps an unbounded
    /// conjugate to +∞.
    pub fn conjugate(&self, t: f64) -> f64 {
        self.try_conjugate(t).unwrap_or(f64::INFINITY)
    }

    /// Φ*⁻¹(t) = ∫₀ᵗ Φ⁻¹(s) / s^{(N+1)/N} ds.
    ///
    /// Integrated in log s; the tail towards s = 0 is closed with the local
    /// exponential decay rate once it has stabilised.
    pub fn sobolev_conjugate_inverse(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let n = self.spec.dim_n as f64;
        let f = |y: f64| self.inverse(y.exp()) * (-y / n).exp();
        let width = std::f64::consts::LN_10 / 4.0;
        let y_floor = (1e-250f64).ln();
        let mut hi = t.ln();
        let mut total = 0.0;
        let mut prev_rate: Option<f64> = None;
        let mut f_hi = f(hi);
        while hi - width > y_floor {
            let lo = hi - width;
            let (panel, _) = quad::integrate(&f, lo, hi, 1e-12, 0.0);
            total += panel;
            let f_lo = f(lo);
            let rate = (f_hi / f_lo).ln() / width;
            if rate > 1e-8 {
                let tail = f_lo / rate;
                let stable = prev_rate.is_some_and(|p| (p - rate).abs() <= 1e-9 * rate);
                if tail <= 1e-15 * total || (stable && hi < t.ln() - 2.0 * std::f64::consts::LN_10) {
                    return Ok(total + tail);
                }
            }
            prev_rate = Some(rate);
            hi = lo;
            f_hi = f_lo;
        }
        Err(Error::hypothesis(
            "Φ* integrability",
            format!("∫ Φ⁻¹(s)/s^((N+1)/N) ds does not converge at s=0 (N={})", self.spec.dim_n),
        ))
    }

    /// Φ*(t), the inverse of [`sobolev_conjugate_inverse`](Self::sobolev_conjugate_inverse).
    pub fn sobolev_conjugate(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let h = |s: f64| self.sobolev_conjugate_inverse(s).unwrap_or(f64::NAN);
        let (lo, hi) =
            quad::bracket_increasing(&h, t, 1.0, 1e300).ok_or_else(|| Error::Domain(format!("Φ*({t}) out of range")))?;
        // the first probe surfaces integrability failures as errors
        self.sobolev_conjugate_inverse(hi)?;
        Ok(quad::bisect_increasing(h, t, lo, hi, 1e-13))
    }
}
