mod common;

use common::*;
use singular_phi::estimates::{envelope_check, lp_log_norm, MoserConstants, MoserSchedule};
use singular_phi::solver::{run_ladder, LadderConfig, NewtonConfig};

#[test]
fn exponent_grid_matches_closed_forms() {
    let mut checked = 0;
    for &ell in &[1.5, 2.0, 2.5] {
        for n in 3..=5usize {
            for &alpha in &[0.3, 1.0, 2.0] {
                for &gamma in &[0.0, 0.25] {
                    let nn = n as f64;
                    if ell >= nn {
                        continue;
                    }
                    let ls = nn * ell / (nn - ell);
                    let s = alpha + gamma;
                    let qmax = if s <= 1.0 { ls / s } else { (ls + (alpha - 1.0) * ls / ell) / s };
                    if qmax <= nn / ell {
                        continue;
                    }
                    let q = 0.5 * (nn / ell + qmax);
                    let m = MoserSchedule::from_exponents(ell, n, alpha, q, 40, 1.0, 1.0, 0.0).unwrap();
                    assert!(m.delta > 1.0);
                    assert!(m.closed_form_gap <= 1e-12, "ℓ={ell} N={n} α={alpha} γ={gamma}: {}", m.closed_form_gap);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 40);
}

#[test]
fn envelope_bounds_the_discrete_solution() {
    let cfg = load("p2-alpha1.cfg");
    let p = cfg.build_problem().unwrap();
    let mesh = cfg.build_mesh(&p.domain).unwrap();
    let lc = LadderConfig::default();
    let l = run_ladder(&p, &mesh, &lc.schedule(), &NewtonConfig::default(), &lc).unwrap();
    let q = p.q.unwrap();
    let consts = MoserConstants::measure(&p, &l, q);
    assert!((consts.omega - 1.0).abs() < 1e-14);
    assert!((consts.a_q - 1.0).abs() < 1e-12);
    let beta1 = (p.ell() + p.alpha - 1.0) * q / (q - 1.0);
    let f1 = MoserSchedule::f1_of(&l.first().solution, beta1);
    assert!((f1 - beta1 * lp_log_norm(&l.first().solution, beta1, false)).abs() < 1e-15);
    let s = MoserSchedule::for_problem(&p, 20, None, f1, &consts).unwrap();
    let rep = envelope_check(&l, &s);
    assert!(rep.all_within && rep.all_monotone);
    for lv in &rep.levels {
        assert!(lv.max_norm <= s.envelope);
        assert!(lv.final_ratio <= s.d0);
        // normalized norms climb toward the max norm
        let top = lv.norms.last().unwrap().2.exp();
        assert!(top <= lv.max_norm * (1.0 + 1e-12));
    }
}

#[test]
fn missing_q_is_a_precondition_error() {
    let p = load("square-convex.cfg").build_problem().unwrap();
    let c = MoserConstants { omega: 1.0, u1_l1: 0.1, a_q: 1.0, b_inf: 1.0, c0: 1.0, c_alpha: 1.0 };
    assert!(MoserSchedule::for_problem(&p, 10, None, 0.0, &c).is_err());
}
