//! Standard normal and chi-squared helpers built on the error function.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use libm::erfc;
use statrs::function::erf::erfc_inv;

/// √(2/π), the mean of a half-normal with unit scale.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function, computed through `erfc` so both
/// tails keep full relative precision.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(x)`.
#[inline]
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of [`norm_cdf`] on (0, 1).
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // the inverse from statrs is only good to ~1e-10; two Newton steps on the
    // accurate cdf bring it to round-off
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..2 {
        let pdf = norm_pdf(x);
        if pdf == 0.0 || !x.is_finite() {
            break;
        }
        let err = if p < 0.5 { norm_cdf(x) - p } else { (1.0 - p) - norm_sf(x) };
        x -= err / pdf;
    }
    x
}

/// `P(χ²₁ > t)`.
pub fn chi2_1_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    erfc((0.5 * t).sqrt())
}

/// Bisection for a sign change of `f` on `[lo, hi]`. Stops once the bracket
/// is narrower than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo * f_hi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < tol {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-13);
        assert!((norm_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-14);
        // deep lower tail keeps relative precision
        let v = norm_cdf(-30.0);
        assert!(v > 0.0 && (v / 4.906_713_927_148_187e-198 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 0.001, 0.05, 0.3, 0.5, 0.8, 0.95, 0.999_999] {
            let x = norm_quantile(p);
            assert!((norm_cdf(x) - p).abs() < 1e-13 * p.max(1e-3), "p = {p}");
        }
        assert!((norm_quantile(0.95) - 1.644_853_626_951_472_2).abs() < 1e-12);
    }

    #[test]
    fn chi2_tail_at_ten_percent_point() {
        // upper 10% point of χ²₁ is 1.6448536…²
        let t = 1.644_853_626_951_472_2f64.powi(2);
        assert!((chi2_1_sf(t) - 0.10).abs() < 1e-12);
        assert_eq!(chi2_1_sf(0.0), 1.0);
    }

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - SQRT_2).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-10).is_none());
    }
}
