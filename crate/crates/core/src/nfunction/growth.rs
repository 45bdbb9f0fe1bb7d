//! Probe-grid diagnostics for the growth hypotheses on φ and the ζ sandwiches.

use super::{probe_grid, NFunction, NFunctionSpec};
use crate::quad;

const INDEX_TOL: f64 = 1e-6;
const SANDWICH_SLACK: f64 = 1e-8;

/// Observed range of a sampled ratio with the probe points attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexRange {
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
}

impl IndexRange {
    fn from_samples(ts: &[f64], vals: &[f64]) -> Self {
        let mut r = IndexRange {
            min: f64::INFINITY,
            argmin: f64::NAN,
            max: f64::NEG_INFINITY,
            argmax: f64::NAN,
        };
        for (&t, &v) in ts.iter().zip(vals) {
            if v.is_nan() {
                // NaN is worst in both directions
                r.max = f64::NAN;
                r.argmax = t;
                return r;
            }
            if v < r.min {
                r.min = v;
                r.argmin = t;
            }
            if v > r.max {
                r.max = v;
                r.argmax = t;
            }
        }
        r
    }

    fn within(&self, lo: f64, hi: f64, tol: f64) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min >= lo - tol && self.max <= hi + tol
    }
}

/// Pass/fail of (φ1)–(φ3) and the ratio bound ℓ ≤ φ(t)t²/Φ(t) ≤ m on the probe grid.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    /// tφ(t) → 0 at 0⁺ and → ∞ at ∞, judged by the log-slopes at both grid ends
    pub phi1: bool,
    pub phi1_slopes: (f64, f64),
    /// tφ(t) strictly increasing
    pub phi2: bool,
    /// first probe interval where monotonicity fails
    pub phi2_violation: Option<(f64, f64)>,
    /// ℓ−1 ≤ (tφ)′/φ ≤ m−1
    pub phi3: bool,
    pub phi3_range: IndexRange,
    /// ℓ ≤ φ(t)t²/Φ(t) ≤ m
    pub ratio: bool,
    pub ratio_range: IndexRange,
}

impl GrowthReport {
    pub fn all_pass(&self) -> bool {
        self.phi1 && self.phi2 && self.phi3 && self.ratio
    }

    pub fn summary(&self) -> String {
        let flag = |b: bool| if b { "pass" } else { "FAIL" };
        format!(
            "(φ1) {} [end log-slopes {:.4}, {:.4}]\n(φ2) {}{}\n(φ3) {} [(tφ)'/φ ∈ [{:.6}, {:.6}], worst at t={:.3e}/{:.3e}]\nratio φt²/Φ {} [∈ [{:.6}, {:.6}]]",
            flag(self.phi1),
            self.phi1_slopes.0,
            self.phi1_slopes.1,
            flag(self.phi2),
            self.phi2_violation.map(|(a, b)| format!(" [fails on ({a:.3e}, {b:.3e})]")).unwrap_or_default(),
            flag(self.phi3),
            self.phi3_range.min,
            self.phi3_range.max,
            self.phi3_range.argmin,
            self.phi3_range.argmax,
            flag(self.ratio),
            self.ratio_range.min,
            self.ratio_range.max,
        )
    }
}

/// Evaluates the growth hypotheses on 200 log-spaced probes in [1e-6, 1e6].
///
/// Never fails: non-finite values count as violations of the relevant check.
pub fn check_hypotheses(spec: &NFunctionSpec) -> GrowthReport {
    let ts = probe_grid();
    let phi = |t: f64| spec.phi.value(t);
    let flux: Vec<f64> = ts.iter().map(|&t| t * phi(t)).collect();

    let n = ts.len();
    let slope = |i: usize, j: usize| (flux[j] / flux[i]).ln() / (ts[j] / ts[i]).ln();
    let slopes = (slope(0, 1), slope(n - 2, n - 1));
    let phi1 = slopes.0 > 0.0 && slopes.1 > 0.0 && flux[0] < flux[n - 1];

    let phi2_violation = ts
        .windows(2)
        .zip(flux.windows(2))
        .find(|(_, f)| !(f[1] > f[0]))
        .map(|(t, _)| (t[0], t[1]));

    let index: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let h = t * 1e-6;
            let d = ((t + h) * phi(t + h) - (t - h) * phi(t - h)) / (2.0 * h);
            d / phi(t)
        })
        .collect();
    let phi3_range = IndexRange::from_samples(&ts, &index);

    let integrand = |s: f64| s * phi(s);
    let mut big = Vec::with_capacity(n);
    let mut acc = quad::integrate(&integrand, 0.0, ts[0], spec.quad_tol, 0.0).0;
    big.push(acc);
    for w in ts.windows(2) {
        acc += quad::integrate(&integrand, w[0], w[1], spec.quad_tol, 0.0).0;
        big.push(acc);
    }
    let ratios: Vec<f64> = ts.iter().zip(&big).map(|(&t, &b)| phi(t) * t * t / b).collect();
    let ratio_range = IndexRange::from_samples(&ts, &ratios);

    GrowthReport {
        phi1,
        phi1_slopes: slopes,
        phi2: phi2_violation.is_none(),
        phi2_violation,
        phi3: phi3_range.within(spec.ell - 1.0, spec.em - 1.0, INDEX_TOL),
        phi3_range,
        ratio: ratio_range.within(spec.ell, spec.em, INDEX_TOL),
        ratio_range,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichViolation {
    pub rho: f64,
    pub t: f64,
    /// "Phi" or "conjugate"
    pub which: &'static str,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SandwichReport {
    pub checked: usize,
    pub violations: Vec<SandwichViolation>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks ζ0(t)Φ(ρ) ≤ Φ(ρt) ≤ ζ1(t)Φ(ρ) and ζ2(t)Φ̃(ρ) ≤ Φ̃(ρt) ≤ ζ3(t)Φ̃(ρ)
/// at every (ρ, t) sample with relative slack 1e-8.
pub fn zeta_sandwich_check(nf: &NFunction, samples: &[(f64, f64)]) -> SandwichReport {
    let z = nf.zeta();
    let mut report = SandwichReport::default();
    let mut test = |rho: f64, t: f64, which: &'static str, lower: f64, value: f64, upper: f64| {
        let ok = lower <= value * (1.0 + SANDWICH_SLACK) && value <= upper * (1.0 + SANDWICH_SLACK);
        if !ok {
            report.violations.push(SandwichViolation {
                rho,
                t,
                which,
                lower,
                value,
                upper,
            });
        }
    };
    for &(rho, t) in samples {
        let base = nf.big_phi(rho);
        test(rho, t, "Phi", z.zeta0(t) * base, nf.big_phi(rho * t), z.zeta1(t) * base);
        let cbase = nf.conjugate(rho);
        test(rho, t, "conjugate", z.zeta2(t) * cbase, nf.conjugate(rho * t), z.zeta3(t) * cbase);
    }
    report.checked = samples.len();
    report
}
