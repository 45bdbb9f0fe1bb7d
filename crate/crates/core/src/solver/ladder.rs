use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::newton::{solve_level, NewtonConfig, NewtonTrace};
use crate::discretization::{gradient_luxemburg_norm, DiscreteField, Mesh};
use crate::error::{Error, Result};
use crate::problem::SingularProblem;

/// ε-ladder settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    /// largest n of the schedule ε = 1/n
    pub n_max: usize,
    /// which n ≤ n_max appear in the schedule
    pub spacing: Spacing,
    /// Cauchy tolerance on ‖u_{k+1} − u_k‖_∞
    pub tol_max: f64,
    /// Cauchy tolerance on ‖∇(u_{k+1} − u_k)‖_Φ
    pub tol_grad: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            n_max: 64,
            spacing: Spacing::Harmonic,
            tol_max: 5e-3,
            tol_grad: 5e-2,
        }
    }
}

impl LadderConfig {
    pub fn schedule(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Harmonic => harmonic_schedule(self.n_max),
            Spacing::Geometric => geometric_schedule(self.n_max),
        }
    }
}

/// Spacing of the ε = 1/n schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    /// n = 1, 2, 3, …, n_max
    #[default]
    Harmonic,
    /// n = 1, 2, 4, …, n_max
    Geometric,
}

/// ε = 1/n for n = 1, …, n_max.
pub fn harmonic_schedule(n_max: usize) -> Vec<f64> {
    (1..=n_max).map(|n| 1.0 / n as f64).collect()
}

/// ε = 1/n for n = 1, 2, 4, … up to and including `n_max` (appended if not a power of two).
pub fn geometric_schedule(n_max: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut n = 1usize;
    while n <= n_max {
        out.push(1.0 / n as f64);
        n *= 2;
    }
    if n / 2 != n_max && n_max > 0 {
        out.push(1.0 / n_max as f64);
    }
    out
}

/// One solved ε-level.
#[derive(Debug, Clone)]
pub struct LadderLevel {
    pub eps: f64,
    pub solution: DiscreteField,
    pub trace: NewtonTrace,
    /// ‖∇u‖_Φ
    pub grad_norm: f64,
    /// distance to the previous level, `None` on the first level
    pub cauchy_max: Option<f64>,
    pub cauchy_grad: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveLadder {
    pub levels: Vec<LadderLevel>,
    /// both Cauchy measures below tolerance on the last two level transitions
    pub converged: bool,
    pub config: LadderConfig,
}

impl SolveLadder {
    pub fn last(&self) -> &LadderLevel {
        self.levels.last().expect("ladders are nonempty")
    }

    pub fn first(&self) -> &LadderLevel {
        &self.levels[0]
    }

    /// Linear extrapolation of the last two levels to ε = 0. The
    /// regularization error is first order in ε, so this removes its leading
    /// term; `None` with fewer than two levels.
    pub fn extrapolated_limit(&self) -> Option<DiscreteField> {
        let n = self.levels.len();
        if n < 2 {
            return None;
        }
        let (a, b) = (&self.levels[n - 2], &self.levels[n - 1]);
        let w = b.eps / (a.eps - b.eps);
        let (ua, ub) = (a.solution.free_values(), b.solution.free_values());
        let free: Vec<f64> = ua.iter().zip(&ub).map(|(x, y)| y + w * (y - x)).collect();
        Some(DiscreteField::from_free(b.solution.mesh().clone(), &free))
    }
}

/// Solves the regularized problems along `schedule`, warm-starting each level
/// from the previous solution.
pub fn run_ladder(
    p: &SingularProblem,
    mesh: &Arc<Mesh>,
    schedule: &[f64],
    newton: &NewtonConfig,
    cfg: &LadderConfig,
) -> Result<SolveLadder> {
    match run_ladder_partial(p, mesh, schedule, newton, cfg)? {
        (ladder, None) => Ok(ladder),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`run_ladder`], but a failing level stops the walk and is returned
/// next to the levels solved so far. Invalid schedules are still errors.
pub fn run_ladder_partial(
    p: &SingularProblem,
    mesh: &Arc<Mesh>,
    schedule: &[f64],
    newton: &NewtonConfig,
    cfg: &LadderConfig,
) -> Result<(SolveLadder, Option<Error>)> {
    if schedule.is_empty() {
        return Err(Error::Precondition("empty ε schedule".into()));
    }
    if let Some(w) = schedule.windows(2).find(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition(format!("ε schedule must be strictly decreasing, found {} then {}", w[0], w[1])));
    }
    let nf = &p.nfun;
    let mut levels: Vec<LadderLevel> = Vec::with_capacity(schedule.len());
    let mut init = DiscreteField::zeros(mesh.clone());
    let mut failure = None;
    for &eps in schedule {
        let wrap = |e: Error| Error::Level { eps, source: Box::new(e) };
        let solved = p.regularize(eps).and_then(|rp| solve_level(&rp, &init, newton));
        let (solution, trace) = match solved {
            Ok(s) => s,
            Err(e) => {
                failure = Some(wrap(e));
                break;
            }
        };
        let (cauchy_max, cauchy_grad) = match levels.last() {
            Some(prev) => {
                let diff = solution.sub(&prev.solution);
                (Some(diff.max_norm()), Some(gradient_luxemburg_norm(&diff, nf)))
            }
            None => (None, None),
        };
        init = solution.clone();
        levels.push(LadderLevel {
            eps,
            grad_norm: gradient_luxemburg_norm(&solution, nf),
            solution,
            trace,
            cauchy_max,
            cauchy_grad,
        });
    }
    let small = |l: &LadderLevel| l.cauchy_max.is_some_and(|m| m <= cfg.tol_max) && l.cauchy_grad.is_some_and(|g| g <= cfg.tol_grad);
    let n = levels.len();
    let converged = failure.is_none() && n >= 3 && small(&levels[n - 1]) && small(&levels[n - 2]);
    Ok((
        SolveLadder {
            levels,
            converged,
            config: *cfg,
        },
        failure,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunction::NFunctionSpec;
    use crate::problem::{Domain, ScalarField};

    fn problem() -> SingularProblem {
        let nf = Arc::new(NFunctionSpec::from_key("p-laplace(2)", None).unwrap().build().unwrap());
        SingularProblem::new(Domain::unit_interval(), nf, ScalarField::Constant(1.0), 0.5).unwrap()
    }

    #[test]
    fn schedule_shape() {
        assert_eq!(geometric_schedule(8), vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(geometric_schedule(6), vec![1.0, 0.5, 0.25, 1.0 / 6.0]);
        assert_eq!(geometric_schedule(1), vec![1.0]);
        assert_eq!(harmonic_schedule(3), vec![1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(LadderConfig::default().schedule().len(), 64);
    }

    #[test]
    fn extrapolation_beats_the_last_level() {
        // u_ε − u_0 is close to linear in ε; compare against a tiny-ε reference
        let mesh = Mesh::unit_interval(64).unwrap().into_shared();
        let p = problem();
        let cfg = LadderConfig::default();
        let l = run_ladder(&p, &mesh, &cfg.schedule(), &NewtonConfig::default(), &cfg).unwrap();
        assert!(l.converged);
        let reference = run_ladder(&p, &mesh, &geometric_schedule(1 << 16), &NewtonConfig::default(), &cfg).unwrap();
        let r = reference.last().solution.max_norm();
        let lim = l.extrapolated_limit().unwrap().max_norm();
        assert!((lim - r).abs() < 1e-3, "{lim} vs {r}");
        assert!((lim - r).abs() < 0.2 * (l.last().solution.max_norm() - r).abs());
    }

    #[test]
    fn empty_and_increasing_schedules_are_rejected() {
        let mesh = Mesh::unit_interval(8).unwrap().into_shared();
        let p = problem();
        let (n, c) = (NewtonConfig::default(), LadderConfig::default());
        assert!(run_ladder(&p, &mesh, &[], &n, &c).is_err());
        assert!(run_ladder(&p, &mesh, &[0.5, 1.0], &n, &c).is_err());
    }

    #[test]
    fn single_level_is_not_converged() {
        let mesh = Mesh::unit_interval(16).unwrap().into_shared();
        let l = run_ladder(&problem(), &mesh, &[1.0], &NewtonConfig::default(), &LadderConfig::default()).unwrap();
        assert_eq!(l.levels.len(), 1);
        assert!(!l.converged);
        assert!(l.first().cauchy_max.is_none());
    }

    #[test]
    fn partial_ladder_keeps_solved_levels() {
        let mesh = Mesh::unit_interval(16).unwrap().into_shared();
        // three Newton steps cannot jump from ε = 0.5 to ε = 1e-6
        let nf = problem().nfun.clone();
        let p = SingularProblem::new(Domain::unit_interval(), nf, ScalarField::func(|x, _| if x[0] > 0.5 { 1.0 } else { 2.0 }), 0.5).unwrap();
        let newton = NewtonConfig { max_iters: 3, ..Default::default() };
        let (l, err) = run_ladder_partial(&p, &mesh, &[1.0, 0.5, 1e-6], &newton, &LadderConfig::default()).unwrap();
        assert!(matches!(err, Some(Error::Level { eps, .. }) if eps == 1e-6), "{err:?}");
        assert_eq!(l.levels.len(), 2);
        assert!(!l.converged);
    }

    #[test]
    fn failing_level_reports_its_eps() {
        let mesh = Mesh::unit_interval(16).unwrap().into_shared();
        let newton = NewtonConfig { max_iters: 1, ..Default::default() };
        match run_ladder(&problem(), &mesh, &[1.0, 0.5], &newton, &LadderConfig::default()) {
            Err(Error::Level { eps, .. }) => assert_eq!(eps, 1.0),
            other => panic!("{other:?}"),
        }
    }
}
