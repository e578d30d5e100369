//! Left-truncated gamma-Gompertz log-likelihood with analytic first and
//! second derivatives in natural `(a, b, σ²)` coordinates.
//!
//! For a sample truncated at `t`,
//!
//! ```text
//! ℓ = Σᵢ [ ln a + b·yᵢ − ln(1 + σ²Gᵢ) − L(σ², Gᵢ) ] + n·L(σ², G_t),
//! L(σ², G) = ln(1 + σ²G)/σ²   (= −ln S)
//! ```
//!
//! Everything is assembled from partial derivatives of `L` and `ln(1+σ²G)`
//! with respect to `(σ², G)` and of `G = a·E(b)` with respect to `(a, b)`.
//! Below the series threshold, `L` is the truncated series and its
//! derivatives are the exact derivatives of that truncation, so value,
//! gradient and Hessian stay mutually consistent.

use nalgebra::{Matrix3, Vector3};

use super::Sample;
use crate::error::{Error, Result};
use crate::model::{ModelParams, MAX_EXPONENT, SIGMA2_SERIES_THRESHOLD};

/// Value, gradient and Hessian of the log-likelihood (order `a, b, σ²`).
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikDerivs {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

/// Partial derivatives of a function of `(σ², G)`.
#[derive(Debug, Clone, Copy, Default)]
struct Partials {
    v: f64,
    g: f64,
    s: f64,
    gg: f64,
    gs: f64,
    ss: f64,
}

/// `x` below which the closed forms of `∂L/∂σ²`, `∂²L/∂σ²²` lose digits to
/// cancellation and the full power series in `x = σ²G` is summed instead.
const SMALL_X: f64 = 0.05;

fn cumulative_hazard_partials(s: f64, g: f64) -> Partials {
    if s < SIGMA2_SERIES_THRESHOLD {
        let g2 = g * g;
        let g3 = g2 * g;
        return Partials {
            v: g - s * g2 / 2.0 + s * s * g3 / 3.0,
            g: 1.0 - s * g + s * s * g2,
            s: -g2 / 2.0 + 2.0 * s * g3 / 3.0,
            gg: -s + 2.0 * s * s * g,
            gs: -g + 2.0 * s * g2,
            ss: 2.0 * g3 / 3.0,
        };
    }
    let x = s * g;
    let q = 1.0 + x;
    let lq = x.ln_1p();
    let (ds, dss) = if x < SMALL_X {
        // L_s  = G² Σ_j (−1)^{j+1} (j+1) x^j/(j+2)
        // L_ss = G³ Σ_j (−1)^j (j+1)(j+2) x^j/(j+3)
        let mut sum_s = 0.0;
        let mut sum_ss = 0.0;
        let mut xj = 1.0;
        for j in 0..64 {
            let jf = j as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let term_s = -sign * (jf + 1.0) * xj / (jf + 2.0);
            sum_s += term_s;
            sum_ss += sign * (jf + 1.0) * (jf + 2.0) * xj / (jf + 3.0);
            if term_s.abs() < 1e-18 * sum_s.abs() {
                break;
            }
            xj *= x;
        }
        (g * g * sum_s, g * g * g * sum_ss)
    } else {
        (
            -lq / (s * s) + g / (s * q),
            2.0 * lq / (s * s * s) - 2.0 * g / (s * s * q) - g * g / (s * q * q),
        )
    };
    Partials { v: lq / s, g: 1.0 / q, s: ds, gg: -s / (q * q), gs: -g / (q * q), ss: dss }
}

/// Partials of `ln(1 + σ²G)`; no cancellation anywhere.
fn log_denominator_partials(s: f64, g: f64) -> Partials {
    let q = 1.0 + s * g;
    Partials {
        v: (s * g).ln_1p(),
        g: s / q,
        s: g / q,
        gg: -s * s / (q * q),
        gs: 1.0 / (q * q),
        ss: -g * g / (q * q),
    }
}

/// `E(b) = (e^{by} − 1)/b` and its first two `b`-derivatives.
fn baseline_shape(b: f64, y: f64) -> (f64, f64, f64) {
    let z = b * y;
    if z < 0.5 {
        // E    = y  Σ_j z^j/(j+1)!
        // E_b  = y² Σ_j (j+1) z^j/(j+2)!
        // E_bb = y³ Σ_j (j+1)(j+2) z^j/(j+3)!
        let (mut e, mut eb, mut ebb) = (0.0, 0.0, 0.0);
        let mut zj = 1.0;
        let (mut f1, mut f2, mut f3) = (1.0, 2.0, 6.0);
        for j in 0..24 {
            let jf = j as f64;
            e += zj / f1;
            eb += (jf + 1.0) * zj / f2;
            ebb += (jf + 1.0) * (jf + 2.0) * zj / f3;
            zj *= z;
            f1 *= jf + 2.0;
            f2 *= jf + 3.0;
            f3 *= jf + 4.0;
        }
        (y * e, y * y * eb, y * y * y * ebb)
    } else {
        let ez = z.exp();
        let e = z.exp_m1() / b;
        let eb = (y * ez - e) / b;
        let ebb = (y * y * ez - 2.0 * eb) / b;
        (e, eb, ebb)
    }
}

/// Accumulates `sign·H(σ², a·E(y))` into value/gradient/Hessian.
#[inline]
fn push_term(out: &mut LogLikDerivs, sign: f64, a: f64, shape: (f64, f64, f64), h: Partials) {
    let (e, eb, ebb) = shape;
    let gb = a * eb;
    out.value += sign * h.v;
    out.gradient[0] += sign * h.g * e;
    out.gradient[1] += sign * h.g * gb;
    out.gradient[2] += sign * h.s;
    let haa = h.gg * e * e;
    let hab = h.gg * e * gb + h.g * eb;
    let hbb = h.gg * gb * gb + h.g * a * ebb;
    let has = h.gs * e;
    let hbs = h.gs * gb;
    out.hessian[(0, 0)] += sign * haa;
    out.hessian[(0, 1)] += sign * hab;
    out.hessian[(1, 1)] += sign * hbb;
    out.hessian[(0, 2)] += sign * has;
    out.hessian[(1, 2)] += sign * hbs;
    out.hessian[(2, 2)] += sign * h.ss;
}

fn empty() -> LogLikDerivs {
    LogLikDerivs { value: 0.0, gradient: Vector3::zeros(), hessian: Matrix3::zeros() }
}

fn symmetrize(out: &mut LogLikDerivs) {
    out.hessian[(1, 0)] = out.hessian[(0, 1)];
    out.hessian[(2, 0)] = out.hessian[(0, 2)];
    out.hessian[(2, 1)] = out.hessian[(1, 2)];
}

fn check_exponent(b: f64, y: f64) -> Result<()> {
    if b * y > MAX_EXPONENT || !(b * y).is_finite() {
        return Err(Error::Domain { y, reason: "e^{by} exceeds 1e300".into() });
    }
    Ok(())
}

/// Derivatives at raw coordinates; callers guarantee `a, b > 0`, `s ≥ 0`.
pub(crate) fn derivs_raw(a: f64, b: f64, s: f64, lifespans: &[f64], truncation: f64) -> Result<LogLikDerivs> {
    let n = lifespans.len() as f64;
    let mut out = empty();
    for &y in lifespans {
        check_exponent(b, y)?;
        let shape = baseline_shape(b, y);
        let g = a * shape.0;
        push_term(&mut out, -1.0, a, shape, log_denominator_partials(s, g));
        push_term(&mut out, -1.0, a, shape, cumulative_hazard_partials(s, g));
        out.value += b * y;
        out.gradient[1] += y;
    }
    out.value += n * a.ln();
    out.gradient[0] += n / a;
    out.hessian[(0, 0)] -= n / (a * a);

    if truncation > 0.0 {
        check_exponent(b, truncation)?;
        let shape = baseline_shape(b, truncation);
        let g = a * shape.0;
        push_term(&mut out, n, a, shape, cumulative_hazard_partials(s, g));
    }
    symmetrize(&mut out);
    if !out.value.is_finite() || out.gradient.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite log-likelihood at a={a}, b={b}, sigma2={s}")));
    }
    Ok(out)
}

/// Contribution of one observation `y` truncated at `t`.
pub(crate) fn observation_derivs(a: f64, b: f64, s: f64, y: f64, truncation: f64) -> Result<LogLikDerivs> {
    derivs_raw(a, b, s, std::slice::from_ref(&y), truncation)
}

/// `Σᵢ [ln f(yᵢ) − ln S(t)]`.
pub fn loglik(params: &ModelParams, sample: &Sample) -> Result<f64> {
    Ok(loglik_derivs(params, sample)?.value)
}

pub fn loglik_derivs(params: &ModelParams, sample: &Sample) -> Result<LogLikDerivs> {
    derivs_raw(params.a(), params.b(), params.sigma2(), sample.lifespans(), sample.truncation())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gompertz_observation() {
        let p = ModelParams::gompertz(0.02, 0.08).unwrap();
        let y = 33.3;
        let sample = Sample::new(vec![y], 0.0).unwrap();
        let g = p.cumulative_baseline(y);
        let want = 0.02f64.ln() + 0.08 * y - g;
        assert!((loglik(&p, &sample).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn value_matches_model_core_composition() {
        let p = ModelParams::new(0.013, 0.092, 0.0625).unwrap();
        let ys = vec![30.5, 31.0, 34.2, 38.9, 41.0, 45.5];
        let sample = Sample::new(ys.clone(), 30.0).unwrap();
        let direct: f64 = ys.iter().map(|&y| p.log_density(y).unwrap()).sum::<f64>()
            - ys.len() as f64 * p.log_survival(30.0).unwrap();
        assert!((loglik(&p, &sample).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn baseline_shape_branches_agree() {
        assert_eq!(baseline_shape(0.1, 0.0), (0.0, 0.0, 0.0));
        for &y in &[1.0, 5.4, 30.0] {
            let b = 0.5 / y;
            let (e1, eb1, ebb1) = baseline_shape(b * (1.0 - 1e-9), y);
            let (e2, eb2, ebb2) = baseline_shape(b * (1.0 + 1e-9), y);
            assert!((e1 / e2 - 1.0).abs() < 1e-8);
            assert!((eb1 / eb2 - 1.0).abs() < 1e-8);
            assert!((ebb1 / ebb2 - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn cumulative_partials_closed_form_vs_series() {
        // across the SMALL_X switch the two exact routes must agree
        for &g in &[0.5, 3.0, 14.0] {
            let s_lo = SMALL_X / g * 0.999;
            let s_hi = SMALL_X / g * 1.001;
            let lo = cumulative_hazard_partials(s_lo, g);
            let hi = cumulative_hazard_partials(s_hi, g);
            assert!((lo.s / hi.s - 1.0).abs() < 1e-3);
            assert!((lo.ss / hi.ss - 1.0).abs() < 5e-3);
        }
    }
}
