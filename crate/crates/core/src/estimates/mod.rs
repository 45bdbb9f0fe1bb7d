//! Numerical checks of the a-priori estimates: boundary lower bound u ≥ C·d,
//! the power-seminorm bound, the Moser L∞ schedule and envelope, and the weak
//! formulation defect of the unregularized problem.

mod envelope;
mod moser;
mod weak;

pub use envelope::{envelope_check, lp_log_norm, EnvelopeLevel, EnvelopeReport};
pub use moser::{sharp_sobolev_constant, MoserConstants, MoserSchedule};
pub use weak::{verify_weak_solution, weak_defect, WeakSolutionReport};

use crate::discretization::{sobolev_seminorm_ell, DiscreteField, DistanceField};
use crate::error::{Error, Result};
use crate::solver::SolveLadder;

/// Largest C with u ≥ C·d at every interior vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLowerBound {
    pub c_fit: f64,
    pub argmin_node: usize,
    /// whether the minimizing vertex lies in the strip d < δ
    pub in_strip: bool,
}

/// C_fit = min over interior vertices of u_i/d_i. `strip` is the width δ used
/// for the in-strip flag (defaults to twice the mesh size).
pub fn fit_boundary_lowerbound(u: &DiscreteField, d: &DistanceField, strip: Option<f64>) -> Result<BoundaryLowerBound> {
    let mesh = u.mesh();
    let delta = strip.unwrap_or(2.0 * mesh.h_max());
    let mut best: Option<(usize, f64)> = None;
    for &v in mesh.free_vertices() {
        let uv = u.values()[v];
        if !(uv > 0.0) {
            return Err(Error::PositivityViolation { vertex: v, value: uv });
        }
        let r = uv / d.values[v];
        if best.map_or(true, |(_, b)| r < b) {
            best = Some((v, r));
        }
    }
    let (argmin_node, c_fit) = best.ok_or_else(|| Error::Precondition("mesh has no interior vertices".into()))?;
    Ok(BoundaryLowerBound {
        c_fit,
        argmin_node,
        in_strip: d.values[argmin_node] < delta,
    })
}

/// Discrete W^{1,ℓ} seminorm of (u+ε)^{(α+ℓ−1)/ℓ} − ε^{(α+ℓ−1)/ℓ}, optionally
/// restricted to cells with d ≥ δ.
pub fn power_seminorm(u: &DiscreteField, eps: f64, alpha: f64, ell: f64, min_distance: Option<f64>) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("power seminorm needs ε > 0, got {eps}")));
    }
    if let Some((v, x)) = u.min_interior().filter(|m| m.1 < 0.0) {
        return Err(Error::Domain(format!("power seminorm needs u ≥ 0, u[{v}] = {x}")));
    }
    let e = (alpha + ell - 1.0) / ell;
    let shift = eps.powf(e);
    let v = if e == 1.0 { u.clone() } else { u.map_interior(|x| (x + eps).powf(e) - shift) };
    Ok(sobolev_seminorm_ell(&v, ell, min_distance))
}

/// Worst violation of u_ε + ε ≥ u_{ε₀} over a ladder, ε₀ the first level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonChain {
    /// min over later levels and interior vertices of u_ε + ε − u_{ε₀}
    pub worst_margin: f64,
    pub worst_level: usize,
    pub worst_node: usize,
    pub threshold: f64,
    pub passed: bool,
}

/// Checks the discrete comparison chain with slack `10·tol`. `None` for a
/// ladder with fewer than two levels.
pub fn comparison_chain(ladder: &SolveLadder, tol: f64) -> Option<ComparisonChain> {
    let first = &ladder.levels.first()?.solution;
    let mesh = first.mesh();
    let mut worst = (f64::INFINITY, 0, 0);
    for (k, l) in ladder.levels.iter().enumerate().skip(1) {
        for &v in mesh.free_vertices() {
            let m = l.solution.values()[v] + l.eps - first.values()[v];
            if m < worst.0 {
                worst = (m, k, v);
            }
        }
    }
    if worst.0 == f64::INFINITY {
        return None;
    }
    let threshold = -10.0 * tol;
    Some(ComparisonChain {
        worst_margin: worst.0,
        worst_level: worst.1,
        worst_node: worst.2,
        threshold,
        passed: worst.0 >= threshold,
    })
}

/// (max − min)/max of the fitted constants; 0 for fewer than two values.
pub fn relative_spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.len() < 2 || hi == lo {
        0.0
    } else {
        (hi - lo) / hi.abs()
    }
}

/// Power seminorms along a ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeminormTrace {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
}

impl PowerSeminormTrace {
    pub fn from_ladder(ladder: &SolveLadder, alpha: f64, ell: f64) -> Result<Self> {
        let mut eps = Vec::new();
        let mut values = Vec::new();
        for l in &ladder.levels {
            eps.push(l.eps);
            values.push(power_seminorm(&l.solution, l.eps, alpha, ell, None)?);
        }
        Ok(Self { eps, values })
    }

    /// |v_last − v_prev| / v_last, `None` for fewer than two levels.
    pub fn final_relative_change(&self) -> Option<f64> {
        let n = self.values.len();
        (n >= 2).then(|| (self.values[n - 1] - self.values[n - 2]).abs() / self.values[n - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{distance_field, Mesh};
    use crate::quad;

    #[test]
    fn lower_bound_examples() {
        let m = Mesh::unit_interval(32).unwrap().into_shared();
        let d = distance_field(&m);
        let u = DiscreteField::from_fn(m.clone(), |_, d| d);
        let b = fit_boundary_lowerbound(&u, &d, None).unwrap();
        assert!((b.c_fit - 1.0).abs() < 1e-15);
        let u = DiscreteField::from_fn(m.clone(), |_, d| 2.0 * d + d * d);
        let b = fit_boundary_lowerbound(&u, &d, None).unwrap();
        assert!((b.c_fit - (2.0 + 1.0 / 32.0)).abs() < 1e-14);
        assert!(b.in_strip);
        assert!(m.vertex(b.argmin_node)[0] == 1.0 / 32.0 || m.vertex(b.argmin_node)[0] == 31.0 / 32.0);
        let mut vals = u.values().to_vec();
        vals[5] = 0.0;
        let z = DiscreteField::from_values(m, vals).unwrap();
        assert!(fit_boundary_lowerbound(&z, &d, None).is_err());
    }

    #[test]
    fn power_seminorm_degenerates_to_plain_seminorm_at_alpha_one() {
        let m = Mesh::unit_square(6).unwrap().into_shared();
        let u = DiscreteField::from_fn(m, |x, _| x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]));
        for &ell in &[1.5, 2.0, 3.0] {
            let a = power_seminorm(&u, 0.3, 1.0, ell, None).unwrap();
            assert_eq!(a, sobolev_seminorm_ell(&u, ell, None));
        }
        assert_eq!(power_seminorm(&DiscreteField::zeros(u.mesh().clone()), 0.1, 2.0, 2.0, None).unwrap(), 0.0);
    }

    #[test]
    fn power_seminorm_matches_dense_quadrature() {
        let m = Mesh::unit_interval(128).unwrap().into_shared();
        let u = DiscreteField::from_fn(m, |x, _| x[0] * (1.0 - x[0]));
        let got = power_seminorm(&u, 0.1, 2.0, 2.0, None).unwrap();
        // d/dx (u+ε)^{3/2} = 1.5 (u+ε)^{1/2} (1−2x)
        let f = |x: f64| 2.25 * (x * (1.0 - x) + 0.1) * (1.0 - 2.0 * x).powi(2);
        let exact = quad::integrate(&f, 0.0, 1.0, 1e-12, 0.0).0.sqrt();
        assert!((got - exact).abs() <= 0.01 * exact, "{got} vs {exact}");
    }

    #[test]
    fn spread_of_constants() {
        assert_eq!(relative_spread(&[2.0]), 0.0);
        assert!((relative_spread(&[1.0, 0.8, 0.9]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn negative_values_are_rejected() {
        let m = Mesh::unit_interval(8).unwrap().into_shared();
        let u = DiscreteField::from_fn(m, |_, _| -0.1);
        assert!(power_seminorm(&u, 0.1, 2.0, 2.0, None).is_err());
    }
}
