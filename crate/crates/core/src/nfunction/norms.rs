/// Luxemburg norm inf{λ > 0 : Σ wᵢ Φ(uᵢ/λ) ≤ 1} of a sampled field.
///
/// `values` and `weights` are quadrature samples (weights ≥ 0). The modular is
/// decreasing in λ, so λ is bracketed by doubling/halving and then bisected in
/// log λ until the modular is within 1e-10 of one.
pub fn luxemburg_norm<F: Fn(f64) -> f64>(values: &[f64], weights: &[f64], phi: F) -> f64 {
    assert_eq!(values.len(), weights.len(), "values and weights must align");
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || weights.iter().all(|&w| w == 0.0) {
        return 0.0;
    }
    let modular = |lam: f64| -> f64 {
        values
            .iter()
            .zip(weights)
            .filter(|(v, w)| **v != 0.0 && **w > 0.0)
            .map(|(v, w)| w * phi(v.abs() / lam))
            .sum()
    };
    let mut lo = scale;
    let mut hi = scale;
    if modular(scale) > 1.0 {
        while modular(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
    } else {
        while modular(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            if lo == 0.0 {
                return 0.0;
            }
        }
    }
    // modular(lo) > 1 >= modular(hi)
    let mut mid = hi;
    for _ in 0..400 {
        mid = (0.5 * (lo.ln() + hi.ln())).exp();
        let m = modular(mid);
        if (m - 1.0).abs() <= 1e-10 || mid <= lo || mid >= hi {
            break;
        }
        if m > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}
