mod common;

use common::*;
use proptest::prelude::*;
use singular_phi::nfunction::{check_hypotheses, zeta_sandwich_check, NFunctionSpec};

const KEYS: [&str; 3] = ["p-laplace(2)", "p-laplace(3)", "pq-laplace(2,4)"];

#[test]
fn young_equality_against_closed_forms() {
    for key in KEYS {
        let d = young_defect(key);
        assert!(d <= 1e-8, "{key}: {d:e}");
    }
}

#[test]
fn zeta_sandwiches_hold_on_random_pairs() {
    for (i, key) in KEYS.iter().chain(["anisotropic(2,2.5,3)", "weighted(2,0.5)"].iter()).enumerate() {
        let r = zeta_sandwich_check(&nfun(key), &sandwich_samples(100 + i as u64, 1000));
        assert_eq!(r.checked, 1000);
        assert!(r.passed(), "{key}: {:?}", &r.violations[..r.violations.len().min(3)]);
    }
}

#[test]
fn catalog_growth_hypotheses_pass() {
    for key in KEYS.iter().chain(["p-laplace(1.5)", "anisotropic(2,3)", "weighted(2.5,0.4)"].iter()) {
        let r = check_hypotheses(&NFunctionSpec::from_key(key, None).unwrap());
        assert!(r.all_pass(), "{key}: {}", r.summary());
    }
}

#[test]
fn conjugate_of_power_law_matches_closed_form() {
    // Φ(s) = s^p/p  ⇒  Φ̃(t) = t^{p'}/p'
    let nf = nfun("p-laplace(3)");
    for &t in &[1e-4f64, 0.3, 2.0, 5e3] {
        let exact = t.powf(1.5) / 1.5;
        assert!((nf.conjugate(t) - exact).abs() <= 1e-9 * exact, "t={t}");
    }
}

proptest! {
    #[test]
    fn young_inequality_holds_everywhere(s in 1e-3f64..1e3, t in 1e-3f64..1e3) {
        let nf = nfun("pq-laplace(2,4)");
        prop_assert!(s * t <= nf.big_phi(s) + nf.conjugate(t) * (1.0 + 1e-10) + 1e-300);
    }

    #[test]
    fn inverse_round_trips(s in 1e-6f64..1e6) {
        let nf = nfun("p-laplace(3)");
        let t = nf.inverse(s);
        prop_assert!((nf.big_phi(t) - s).abs() <= 1e-9 * s);
    }
}
