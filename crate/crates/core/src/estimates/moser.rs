use statrs::function::gamma::gamma;

use super::envelope::lp_log_norm;
use crate::discretization::DiscreteField;
use crate::error::{Error, Result};
use crate::problem::SingularProblem;
use crate::solver::SolveLadder;

/// Best constant of ‖u‖_{p*} ≤ μ‖∇u‖_p on ℝ^N (Aubin–Talenti), 1 < p < N.
pub fn sharp_sobolev_constant(p: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if !(p > 1.0 && p < nf) {
        return Err(Error::Precondition(format!("sharp Sobolev constant needs 1 < p < N, got p = {p}, N = {n}")));
    }
    let ratio = gamma(1.0 + nf / 2.0) * gamma(nf) / (gamma(nf / p) * gamma(1.0 + nf - nf / p));
    Ok(std::f64::consts::PI.powf(-0.5) * nf.powf(-1.0 / p) * ((p - 1.0) / (nf - p)).powf(1.0 - 1.0 / p) * ratio.powf(1.0 / nf))
}

/// Data entering the constant B of the Moser step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoserConstants {
    /// |Ω|
    pub omega: f64,
    /// ‖u₁‖₁ of the first-level solution
    pub u1_l1: f64,
    pub a_q: f64,
    pub b_inf: f64,
    /// bound on ‖u_n^{α+γ}‖_q
    pub c0: f64,
    /// bound on ‖u_n‖_{(α+γ)q}^{(α+γ)q}, used when α > 1
    pub c_alpha: f64,
}

impl MoserConstants {
    /// Measures the constants on a ladder: norms of a and b by quadrature, c₀
    /// and C as maxima over the levels.
    pub fn measure(p: &SingularProblem, ladder: &SolveLadder, q: f64) -> Self {
        let u1 = &ladder.first().solution;
        let mesh = u1.mesh();
        let s = p.alpha + p.gamma;
        let (mut a_int, mut b_inf) = (0.0, 0.0f64);
        for c in 0..mesh.n_cells() {
            for qp in mesh.quad_points(c) {
                let fp = mesh.field_point(c, qp);
                a_int += qp.weight * p.a.eval(&fp).abs().powf(q);
                if !p.b.is_zero() {
                    b_inf = b_inf.max(p.b.eval(&fp).abs());
                }
            }
        }
        let mut c_alpha = 0.0f64;
        for l in &ladder.levels {
            // ∫ u^{sq} = exp(sq · ln‖u‖_{sq})
            c_alpha = c_alpha.max((s * q * lp_log_norm(&l.solution, s * q, false)).exp());
        }
        Self {
            omega: mesh.total_measure(),
            u1_l1: lp_log_norm(u1, 1.0, false).exp(),
            a_q: a_int.powf(1.0 / q),
            b_inf,
            c0: c_alpha.powf(1.0 / q),
            c_alpha,
        }
    }
}

/// Exponent ladder β_k and the bound sequence F_{k+1} = λ_k + δF_k.
///
/// Vectors are indexed from k = 1 (entry 0).
#[derive(Debug, Clone, PartialEq)]
pub struct MoserSchedule {
    pub q: f64,
    pub q_prime: f64,
    pub ell: f64,
    pub ell_star: f64,
    pub beta1: f64,
    pub delta: f64,
    /// first k with β_k > 1 and β_k + q′(α−1) > 1
    pub k0: usize,
    pub mu: f64,
    pub big_b: f64,
    /// ℓ*·ln(μBβ₁)
    pub log_const: f64,
    pub beta: Vec<f64>,
    pub beta_star: Vec<f64>,
    pub lambda: Vec<f64>,
    pub f: Vec<f64>,
    /// largest relative gap between recursion and closed forms
    pub closed_form_gap: f64,
    /// limit bound for F_k/β_k
    pub d0: f64,
    pub envelope: f64,
}

impl MoserSchedule {
    /// Builds the schedule from exponents and B directly.
    #[allow(clippy::too_many_arguments)]
    pub fn from_exponents(ell: f64, dim_n: usize, alpha: f64, q: f64, k_max: usize, mu: f64, big_b: f64, f1: f64) -> Result<Self> {
        let n = dim_n as f64;
        if !(ell > 1.0 && ell < n) {
            return Err(Error::Precondition(format!("ℓ* undefined: need 1 < ℓ < N, got ℓ = {ell}, N = {dim_n}")));
        }
        if k_max == 0 {
            return Err(Error::Precondition("k_max must be at least 1".into()));
        }
        if !(mu > 0.0 && big_b > 0.0) {
            return Err(Error::Precondition(format!("μ and B must be positive, got μ = {mu}, B = {big_b}")));
        }
        if !(q > 1.0) {
            return Err(Error::Precondition(format!("q must exceed 1, got {q}")));
        }
        let ell_star = n * ell / (n - ell);
        let q_prime = q / (q - 1.0);
        let beta1 = (ell + alpha - 1.0) * q_prime;
        let delta = ell_star / (q_prime * ell);
        if !(delta > 1.0) {
            return Err(Error::Moser(format!("q ≤ N/ℓ: iteration does not close (q = {q}, N/ℓ = {}, δ = {delta})", n / ell)));
        }

        let mut beta = vec![beta1];
        let mut beta_star = Vec::with_capacity(k_max);
        let mut lambda = Vec::with_capacity(k_max);
        let mut f = vec![f1];
        for k in 0..k_max {
            let bs = beta[k] + beta1;
            beta_star.push(bs);
            lambda.push(ell_star * (mu * big_b * bs).ln());
            if k + 1 < k_max {
                beta.push(delta * bs);
                f.push(lambda[k] + delta * f[k]);
            }
        }

        let closed_beta = |k: i32| (2.0 * delta.powi(k) - delta.powi(k - 1) - delta) / (delta - 1.0) * beta1;
        let closed_star = |k: i32| (2.0 * delta.powi(k) - delta.powi(k - 1) - 1.0) / (delta - 1.0) * beta1;
        let mut gap = 0.0f64;
        for k in 0..k_max {
            let kk = k as i32 + 1;
            gap = gap.max((beta[k] - closed_beta(kk)).abs() / beta[k].abs());
            gap = gap.max((beta_star[k] - closed_star(kk)).abs() / beta_star[k].abs());
        }

        let k0 = beta
            .iter()
            .position(|&b| b > 1.0 && b + q_prime * (alpha - 1.0) > 1.0)
            .map(|i| i + 1)
            .unwrap_or(k_max + 1);

        let log_const = ell_star * (mu * big_b * beta1).ln();
        let dm = delta - 1.0;
        let series = delta / (dm * dm);
        let num = f1 + log_const / dm + ell_star * ((2.0 / dm).ln() / dm + delta.ln() * series);
        let d0 = num / ((2.0 * delta - 1.0) * beta1 / dm);
        Ok(Self {
            q,
            q_prime,
            ell,
            ell_star,
            beta1,
            delta,
            k0,
            mu,
            big_b,
            log_const,
            beta,
            beta_star,
            lambda,
            f,
            closed_form_gap: gap,
            d0,
            envelope: d0.exp(),
        })
    }

    /// Schedule for `p` with its configured q; B from `consts`, μ defaulting to
    /// the sharp Sobolev constant for (ℓ, N).
    pub fn for_problem(p: &SingularProblem, k_max: usize, mu: Option<f64>, f1: f64, consts: &MoserConstants) -> Result<Self> {
        let q = p
            .q
            .ok_or_else(|| Error::Precondition("the Moser schedule needs the integrability exponent q of a".into()))?;
        let nf = &p.nfun;
        let n = nf.dim_n() as f64;
        let ell = nf.ell();
        if !(q > n / ell) {
            return Err(Error::Moser(format!("q ≤ N/ℓ: iteration does not close (q = {q}, N/ℓ = {})", n / ell)));
        }
        let w = p.q_window()?;
        if !w.contains(q) {
            return Err(Error::Precondition(format!("q = {q} outside the admissible window {w}")));
        }
        let mu = match mu {
            Some(m) => m,
            None => sharp_sobolev_constant(ell, nf.dim_n())?,
        };
        let big_b = Self::branch_constant(p.alpha, ell, q, nf.big_phi(1.0), consts);
        Self::from_exponents(ell, nf.dim_n(), p.alpha, q, k_max, mu, big_b, f1)
    }

    /// The two-branch constant B (α ≤ 1 and α > 1).
    pub fn branch_constant(alpha: f64, ell: f64, q: f64, phi1: f64, c: &MoserConstants) -> f64 {
        let qp = q / (q - 1.0);
        let lead = ell * phi1 / qp;
        let first = if alpha <= 1.0 {
            lead * c.omega.powf(2.0 - alpha - 1.0 / qp) * c.u1_l1.powf(alpha - 1.0)
        } else {
            lead * (c.omega + c.c_alpha).powf(1.0 / q)
        };
        (first + c.a_q + c.b_inf * c.c0) / lead
    }

    /// F₁ = β₁·ln‖u‖_{β₁}.
    pub fn f1_of(u: &DiscreteField, beta1: f64) -> f64 {
        beta1 * lp_log_norm(u, beta1, false)
    }

    pub fn k_max(&self) -> usize {
        self.beta.len()
    }

    /// F_k/β_k.
    pub fn ratios(&self) -> Vec<f64> {
        self.f.iter().zip(&self.beta).map(|(f, b)| f / b).collect()
    }

    /// Σ_{n≥1} n/δⁿ = δ/(δ−1)².
    pub fn series_n_over_delta(&self) -> f64 {
        self.delta / (self.delta - 1.0).powi(2)
    }

    /// Rows (k, β_k, β_k*, λ_k, F_k, F_k/β_k) from k₀ on.
    pub fn rows(&self) -> Vec<(usize, f64, f64, f64, f64, f64)> {
        let start = self.k0.max(1) - 1;
        (start..self.k_max())
            .map(|i| (i + 1, self.beta[i], self.beta_star[i], self.lambda[i], self.f[i], self.f[i] / self.beta[i]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_case() {
        let s = MoserSchedule::from_exponents(2.0, 3, 1.0, 2.0, 10, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(s.ell_star, 6.0);
        assert_eq!(s.q_prime, 2.0);
        assert_eq!(s.beta1, 4.0);
        assert_eq!(s.delta, 1.5);
        assert_eq!(s.beta[1], 12.0);
        assert_eq!(s.beta_star[0], 8.0);
        assert_eq!(s.k0, 1);
        assert!((s.series_n_over_delta() - 6.0).abs() < 1e-15);
        let partial: f64 = (1..200).map(|n| n as f64 / 1.5f64.powi(n)).sum();
        assert!((partial - 6.0).abs() < 1e-12);
    }

    #[test]
    fn delta_at_most_one_is_an_error() {
        // q = N/ℓ gives δ = 1
        let err = MoserSchedule::from_exponents(2.0, 3, 1.0, 1.5, 5, 1.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("q ≤ N/ℓ: iteration does not close"), "{err}");
        assert!(MoserSchedule::from_exponents(2.0, 3, 1.0, 1.2, 5, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn envelope_diverges_as_q_approaches_critical_value() {
        // d0 ≈ (ℓ*/β₁)·ln(2/(δ−1)) near δ = 1, so e^{d0} blows up like 1/(δ−1)
        let mut last = f64::NEG_INFINITY;
        for &q in &[3.0, 2.0, 1.6, 1.51, 1.501, 1.5 + 1e-6, 1.5 + 1e-9] {
            let s = MoserSchedule::from_exponents(2.0, 3, 1.0, q, 5, 1.0, 2.0, 1.0).unwrap();
            assert!(s.delta > 1.0 && s.d0 > last, "q={q}: d0={}", s.d0);
            last = s.d0;
            if q < 1.5 + 1e-8 {
                assert!(s.envelope * (s.delta - 1.0) > 1.0, "{}", s.envelope);
            }
        }
    }

    #[test]
    fn k0_skips_small_exponents() {
        // α small and q′ near 1: β₁ = (ℓ+α−1)q′ can be < 1
        let s = MoserSchedule::from_exponents(1.2, 2, 0.1, 20.0, 12, 1.0, 1.0, 0.0).unwrap();
        assert!(s.beta1 < 1.0);
        assert!(s.k0 > 1);
        let k = s.k0 - 1;
        assert!(s.beta[k] > 1.0 && s.beta[k] + s.q_prime * (0.1 - 1.0) > 1.0);
        assert_eq!(s.rows()[0].0, s.k0);
    }

    #[test]
    fn bound_sequence_limit_is_below_d0() {
        let s = MoserSchedule::from_exponents(2.0, 3, 1.0, 2.0, 60, 1.0, 3.0, 2.0).unwrap();
        let r = s.ratios();
        assert!(*r.last().unwrap() <= s.d0);
        assert!((r[59] - r[58]).abs() < 1e-8);
    }

    #[test]
    fn ratio_differences_decay_like_one_over_delta() {
        // λ_k grows like k·ln δ, so successive gaps shrink by (1/δ)(1 + O(1/k))
        let s = MoserSchedule::from_exponents(2.0, 3, 1.0, 2.0, 60, 1.0, 3.0, 2.0).unwrap();
        let r = s.ratios();
        let gaps: Vec<f64> = r.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for k in 20..55 {
            let ratio = gaps[k + 1] / gaps[k];
            assert!((ratio * s.delta - 1.0).abs() <= 2.0 / k as f64, "k={k}: {ratio}");
        }
    }

    #[test]
    fn sharp_sobolev_constant_known_value() {
        // N = 3, p = 2: ‖u‖₆² ≤ S⁻¹‖∇u‖₂² with S = 3(π/2)^{4/3}
        let s = 3.0 * (std::f64::consts::PI / 2.0).powf(4.0 / 3.0);
        let got = sharp_sobolev_constant(2.0, 3).unwrap();
        assert!((got - s.powf(-0.5)).abs() < 1e-12, "{got}");
        assert!(sharp_sobolev_constant(3.0, 3).is_err());
    }

    #[test]
    fn branch_constant_switches_at_alpha_one() {
        let c = MoserConstants {
            omega: 1.0,
            u1_l1: 0.1,
            a_q: 2.0,
            b_inf: 0.0,
            c0: 5.0,
            c_alpha: 3.0,
        };
        let lo = MoserSchedule::branch_constant(1.0, 2.0, 2.0, 0.5, &c);
        // α = 1: |Ω|^{1/2}·‖u₁‖₁^0 + (q′/(ℓΦ(1)))‖a‖_q = 1 + 2·2/(2·0.5)
        assert!((lo - (1.0 + 4.0)).abs() < 1e-14);
        let hi = MoserSchedule::branch_constant(1.5, 2.0, 2.0, 0.5, &c);
        assert!((hi - (2.0 + 4.0)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn recursion_matches_closed_form(ell in 1.2f64..2.8, n in 3usize..6, alpha in 0.05f64..3.0, gamma in 0.0f64..0.5, t in 0.01f64..0.99) {
            let nn = n as f64;
            prop_assume!(ell < nn);
            let ls = nn * ell / (nn - ell);
            let s = alpha + gamma;
            let qmax = if s <= 1.0 { ls / s } else { (ls + (alpha - 1.0) * ls / ell) / s };
            let qmin = nn / ell;
            prop_assume!(qmax > qmin * 1.01);
            let q = qmin * 1.01 + t * (qmax - qmin * 1.01);
            let s = MoserSchedule::from_exponents(ell, n, alpha, q, 40, 1.0, 1.0, 0.0).unwrap();
            prop_assert!(s.delta > 1.0);
            prop_assert!(s.closed_form_gap <= 1e-12, "gap {}", s.closed_form_gap);
            for k in 0..39 {
                prop_assert!(s.beta[k + 1] > s.beta[k]);
                prop_assert_eq!(s.beta_star[k], s.beta[k] + s.beta1);
                prop_assert_eq!(s.beta[k + 1], s.delta * s.beta_star[k]);
            }
        }
    }
}
