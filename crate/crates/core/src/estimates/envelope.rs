use super::moser::MoserSchedule;
use crate::discretization::DiscreteField;
use crate::solver::SolveLadder;

/// ln(Σ w_i |v_i|^β)^{1/β}, evaluated by log-sum-exp; with `normalized` the
/// weights are rescaled to a probability measure.
pub fn log_power_mean(values: &[f64], weights: &[f64], beta: f64, normalized: bool) -> f64 {
    let terms: Vec<f64> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, &w)| w.ln() + beta * v.abs().ln())
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut lse = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
    if normalized {
        lse -= weights.iter().sum::<f64>().ln();
    }
    lse / beta
}

/// ln‖u‖_β over the mesh quadrature points.
pub fn lp_log_norm(u: &DiscreteField, beta: f64, normalized: bool) -> f64 {
    let (v, w) = sample(u);
    log_power_mean(&v, &w, beta, normalized)
}

fn sample(u: &DiscreteField) -> (Vec<f64>, Vec<f64>) {
    let mesh = u.mesh();
    let mut v = Vec::new();
    let mut w = Vec::new();
    for c in 0..mesh.n_cells() {
        for q in mesh.quad_points(c) {
            v.push(u.value_at(c, &q.bary));
            w.push(q.weight);
        }
    }
    (v, w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeLevel {
    pub eps: f64,
    pub max_norm: f64,
    /// (k, β_k, ln‖u‖_{β_k} on the normalized measure, ln‖u‖_{β_k})
    pub norms: Vec<(usize, f64, f64, f64)>,
    /// measured F_k/β_k = ln‖u‖_{β_k} at the largest k
    pub final_ratio: f64,
    pub within: bool,
    /// normalized norms nondecreasing in k
    pub monotone: bool,
}

/// Per-level comparison of the L^{β_k} norms with the envelope e^{d0}.
/// Informational only: μ and the measured constants are not rigorous.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub d0: f64,
    pub envelope: f64,
    pub levels: Vec<EnvelopeLevel>,
    pub all_within: bool,
    pub all_monotone: bool,
}

pub fn envelope_check(ladder: &SolveLadder, sched: &MoserSchedule) -> EnvelopeReport {
    let start = sched.k0.max(1) - 1;
    let levels: Vec<EnvelopeLevel> = ladder
        .levels
        .iter()
        .map(|l| {
            let (v, w) = sample(&l.solution);
            let norms: Vec<(usize, f64, f64, f64)> = (start..sched.k_max())
                .map(|i| {
                    let b = sched.beta[i];
                    (i + 1, b, log_power_mean(&v, &w, b, true), log_power_mean(&v, &w, b, false))
                })
                .collect();
            let monotone = norms.windows(2).all(|p| p[1].2 >= p[0].2 - 1e-12 * p[0].2.abs().max(1.0));
            let max_norm = l.solution.max_norm();
            EnvelopeLevel {
                eps: l.eps,
                max_norm,
                final_ratio: norms.last().map_or(f64::NAN, |n| n.3),
                norms,
                within: max_norm <= sched.envelope,
                monotone,
            }
        })
        .collect();
    EnvelopeReport {
        d0: sched.d0,
        envelope: sched.envelope,
        all_within: levels.iter().all(|l| l.within),
        all_monotone: levels.iter().all(|l| l.monotone),
        levels,
    }
}
