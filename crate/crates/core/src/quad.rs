//! Quadrature rules and scalar root bracketing shared by the numerical modules.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel; returns (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Panels are bisected until the Kronrod/Gauss difference drops below
/// `max(abs_tol, rel_tol * |panel|)` or the depth limit is reached. Returns the
/// integral and the accumulated error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), rel: f64, abs: f64, depth: u32) -> (f64, f64) {
        let (val, err) = whole;
        if err <= abs.max(rel * val.abs()) || depth == 0 || !val.is_finite() {
            return (val, err);
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        let (lv, le) = rec(f, a, m, left, rel, 0.5 * abs, depth - 1);
        let (rv, re) = rec(f, m, b, right, rel, 0.5 * abs, depth - 1);
        (lv + rv, le + re)
    }
    let whole = gk15(f, a, b);
    rec(f, a, b, whole, rel_tol, abs_tol, 48)
}

/// Gauss–Legendre nodes/weights on [0, 1], exact through degree 5.
pub const GL3_NODES: [f64; 3] = [
    0.112_701_665_379_258_31,
    0.5,
    0.887_298_334_620_741_7,
];
pub const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Degree-4 six-point triangle rule: barycentric points and weights summing to one.
pub const TRI6_POINTS: [[f64; 3]; 6] = {
    const A: f64 = 0.445_948_490_915_965;
    const B: f64 = 0.091_576_213_509_771;
    [
        [A, A, 1.0 - 2.0 * A],
        [A, 1.0 - 2.0 * A, A],
        [1.0 - 2.0 * A, A, A],
        [B, B, 1.0 - 2.0 * B],
        [B, 1.0 - 2.0 * B, B],
        [1.0 - 2.0 * B, B, B],
    ]
};
pub const TRI6_WEIGHTS: [f64; 6] = [
    0.223_381_589_678_011,
    0.223_381_589_678_011,
    0.223_381_589_678_011,
    0.109_951_743_655_322,
    0.109_951_743_655_322,
    0.109_951_743_655_322,
];

/// Bisection for an increasing function: returns `x` in `[lo, hi]` with `f(x) ≈ target`.
///
/// Requires `f(lo) <= target <= f(hi)`. Stops when the bracket is relatively
/// narrower than `rel_tol`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= rel_tol * hi.abs() {
            return mid;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Grows a bracket `[lo, hi]` geometrically around `start` until
/// `f(lo) <= target <= f(hi)` for an increasing `f` on `(0, ∞)`.
/// Returns `None` when `hi` passes `upper_guard`.
pub fn bracket_increasing<F: Fn(f64) -> f64>(f: &F, target: f64, start: f64, upper_guard: f64) -> Option<(f64, f64)> {
    let mut lo = start;
    let mut hi = start;
    if f(start) < target {
        loop {
            lo = hi;
            hi *= 2.0;
            if hi > upper_guard {
                return None;
            }
            if f(hi) >= target {
                return Some((lo, hi));
            }
        }
    } else {
        loop {
            hi = lo;
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                return Some((0.0, hi));
            }
            if f(lo) <= target {
                return Some((lo, hi));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let (v, _) = gk15(&|x: f64| x.powi(20), 0.0, 1.0);
        assert!((v - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_power_singularity() {
        let (v, _) = integrate(&|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-12, 0.0);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn low_order_rules_have_unit_mass() {
        assert!((GL3_WEIGHTS.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((TRI6_WEIGHTS.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // degree 4 exactness on the reference triangle: ∫ λ0^4 = 4!2!/6! * 2|T| -> mean 24*2/720
        let mean: f64 = TRI6_POINTS.iter().zip(TRI6_WEIGHTS).map(|(p, w)| w * p[0].powi(4)).sum();
        assert!((mean - 48.0 / 720.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_finds_cube_root() {
        let x = bisect_increasing(|x| x * x * x, 2.0, 0.0, 2.0, 1e-15);
        assert!((x - 2f64.cbrt()).abs() < 1e-14);
    }
}
