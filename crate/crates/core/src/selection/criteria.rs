use serde::{Deserialize, Serialize};

use super::focus::FocusGeometry;
use crate::error::{Error, Result};
use crate::inference::{FitResult, InfoQuantities, Model};
use crate::special::{bisect, chi2_1_sf, norm_cdf, norm_pdf, norm_sf, SQRT_2_OVER_PI};

/// Root of `r²Φ(r) + rφ(r) = Φ(r)`: the MSE tolerance radius in units of κ.
pub const PRETEST_THRESHOLD: f64 = 0.839_923_675_692_372_6;

/// Root of `rΦ(r) + φ(r) = √(2/π)`: where the two MAE risks of the σ² focus cross.
pub const MAE_SIGMA2_THRESHOLD: f64 = 0.639_888_385_473_73;

/// Recomputes [`PRETEST_THRESHOLD`] by bisection.
pub fn pretest_threshold_root() -> f64 {
    bisect(|r| r * r * norm_cdf(r) + r * norm_pdf(r) - norm_cdf(r), 0.1, 2.0, 1e-15).expect("bracketed")
}

/// Recomputes [`MAE_SIGMA2_THRESHOLD`] by bisection.
pub fn mae_sigma2_threshold_root() -> f64 {
    bisect(|r| r * norm_cdf(r) + norm_pdf(r) - SQRT_2_OVER_PI, 0.1, 2.0, 1e-15).expect("bracketed")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intermediates {
    pub delta_hat: f64,
    pub kappa_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau0_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub criterion: String,
    pub score_null: f64,
    pub score_full: f64,
    pub chosen: Model,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub intermediates: Option<Intermediates>,
}

/// Smaller score wins; ties go to the null model.
pub fn argmin(score_null: f64, score_full: f64) -> Model {
    if score_full < score_null {
        Model::Full
    } else {
        Model::Null
    }
}

/// `Φ(x/τ₀)` with its `τ₀ → 0` limit.
fn ratio_cdf(x: f64, tau0: f64) -> f64 {
    if tau0 > 0.0 {
        norm_cdf(x / tau0)
    } else if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn check_geometry(tau0: f64, omega: f64, delta: f64, kappa: f64) -> Result<()> {
    for (name, v) in [("tau0", tau0), ("omega", omega), ("delta", delta), ("kappa", kappa)] {
        if !v.is_finite() {
            return Err(Error::Numerical(format!("{name} is not finite ({v})")));
        }
    }
    if !(kappa > 0.0) {
        return Err(Error::Numerical(format!("kappa must be positive, got {kappa}")));
    }
    if tau0 < 0.0 {
        return Err(Error::InvalidArgument(format!("tau0 must be >= 0, got {tau0}")));
    }
    Ok(())
}

/// Limiting mean absolute errors `(E|Λ_null|, E|Λ_full|)` of the two focus
/// estimators for geometry `(τ₀, ω, δ, κ)`.
pub fn mae_risks(tau0: f64, omega: f64, delta: f64, kappa: f64) -> Result<(f64, f64)> {
    check_geometry(tau0, omega, delta, kappa)?;
    let m = omega * delta;
    let r = delta / kappa;
    let null = if tau0 > 0.0 { 2.0 * tau0 * norm_pdf(m / tau0) } else { 0.0 } + 2.0 * m * (ratio_cdf(m, tau0) - 0.5);

    let spread = (tau0 * tau0 + omega * omega * kappa * kappa).sqrt();
    let tail = if spread == 0.0 { 0.0 } else { spread * SQRT_2_OVER_PI * ratio_cdf(r * spread, tau0) };
    let cross = omega * kappa * norm_pdf(r) * 2.0 * (ratio_cdf(m, tau0) - 0.5);
    let full = null * norm_sf(r) + tail - cross;

    for (term, v) in [("null MAE", null), ("full MAE", full)] {
        if !v.is_finite() {
            return Err(Error::Numerical(format!("{term} is not finite")));
        }
    }
    Ok((null, full))
}

/// Limiting mean squared errors `(E Λ_null², E Λ_full²)`.
pub fn mse_risks(tau0: f64, omega: f64, delta: f64, kappa: f64) -> Result<(f64, f64)> {
    check_geometry(tau0, omega, delta, kappa)?;
    let r = delta / kappa;
    let t2 = tau0 * tau0;
    let w2 = omega * omega;
    let null = t2 + w2 * delta * delta;
    let full = t2 + w2 * (delta * delta * norm_sf(r) - kappa * delta * norm_pdf(r) + kappa * kappa * norm_cdf(r));
    Ok((null, full))
}

fn intermediates(info: &InfoQuantities, geometry: Option<&FocusGeometry>) -> Intermediates {
    Intermediates {
        delta_hat: info.delta_hat,
        kappa_hat: info.kappa(),
        tau0_hat: geometry.map(|g| g.tau0),
        omega_hat: geometry.map(|g| g.omega),
    }
}

/// FIC on the MAE scale for one focus. `label` names the focus in the report.
pub fn fic_mae(geometry: &FocusGeometry, info: &InfoQuantities, label: &str) -> Result<SelectionReport> {
    let (null, full) = mae_risks(geometry.tau0, geometry.omega, info.delta_hat, info.kappa())?;
    Ok(SelectionReport {
        criterion: format!("fic_mae[{label}]"),
        score_null: null,
        score_full: full,
        chosen: argmin(null, full),
        intermediates: Some(intermediates(info, Some(geometry))),
    })
}

/// FIC on the MSE scale (reported alongside, not a decision rule of its own).
pub fn fic_mse(geometry: &FocusGeometry, info: &InfoQuantities, label: &str) -> Result<SelectionReport> {
    let (null, full) = mse_risks(geometry.tau0, geometry.omega, info.delta_hat, info.kappa())?;
    Ok(SelectionReport {
        criterion: format!("fic_mse[{label}]"),
        score_null: null,
        score_full: full,
        chosen: argmin(null, full),
        intermediates: Some(intermediates(info, Some(geometry))),
    })
}

/// Pre-test: full model iff `δ̂/κ̂ > 0.8399`. Scores are the MSE risks of
/// the σ² focus (`τ₀ = 0`, `|ω| = 1`).
pub fn pretest(info: &InfoQuantities) -> Result<SelectionReport> {
    let (null, full) = mse_risks(0.0, -1.0, info.delta_hat, info.kappa())?;
    let chosen = if info.delta_over_kappa() > PRETEST_THRESHOLD { Model::Full } else { Model::Null };
    Ok(SelectionReport {
        criterion: "pretest".into(),
        score_null: null,
        score_full: full,
        chosen,
        intermediates: Some(intermediates(info, None)),
    })
}

/// AIC with the boundary-corrected penalty `6 − 2Φ(−δ̂/κ̂)` for the full model.
pub fn aic_star(fit_full: &FitResult, fit_null: &FitResult, info: &InfoQuantities) -> Result<SelectionReport> {
    if fit_full.model != Model::Full || fit_null.model != Model::Null {
        return Err(Error::InvalidArgument("aic_star needs a full and a null fit".into()));
    }
    let r = info.delta_over_kappa();
    if !r.is_finite() {
        return Err(Error::Numerical("delta/kappa is not finite".into()));
    }
    let full = -2.0 * fit_full.loglik + 6.0 - 2.0 * norm_sf(r);
    let null = -2.0 * fit_null.loglik + 4.0;
    Ok(SelectionReport {
        criterion: "aic_star".into(),
        score_null: null,
        score_full: full,
        chosen: argmin(null, full),
        intermediates: Some(intermediates(info, None)),
    })
}

/// Plain AIC, for comparison with [`aic_star`].
pub fn aic(fit: &FitResult) -> f64 {
    let k = if fit.model == Model::Full { 3.0 } else { 2.0 };
    -2.0 * fit.loglik + 2.0 * k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrtResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Default level at which the LRT becomes a selection decision.
pub const LRT_ALPHA: f64 = 0.05;

impl LrtResult {
    pub fn chosen(&self, alpha: f64) -> Model {
        if self.p_value < alpha {
            Model::Full
        } else {
            Model::Null
        }
    }

    pub fn report(&self, alpha: f64) -> SelectionReport {
        SelectionReport {
            criterion: "lrt".into(),
            score_null: self.p_value,
            score_full: alpha,
            chosen: self.chosen(alpha),
            intermediates: None,
        }
    }
}

/// Likelihood ratio test of `σ² = 0` against the ½χ²₀ + ½χ²₁ mixture.
pub fn lrt(fit_full: &FitResult, fit_null: &FitResult) -> Result<LrtResult> {
    let raw = 2.0 * (fit_full.loglik - fit_null.loglik);
    if !raw.is_finite() {
        return Err(Error::Numerical("LRT statistic is not finite".into()));
    }
    if raw < -1e-6 {
        return Err(Error::Numerical(format!("nesting violated: 2(l_full - l_null) = {raw:e}")));
    }
    Ok(lrt_from_statistic(raw.max(0.0)))
}

pub fn lrt_from_statistic(t: f64) -> LrtResult {
    let t = t.max(0.0);
    let p_value = if t == 0.0 { 1.0 } else { 0.5 * chi2_1_sf(t) };
    LrtResult { statistic: t, p_value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_match_bisection() {
        assert!((pretest_threshold_root() - PRETEST_THRESHOLD).abs() < 1e-12);
        assert!((mae_sigma2_threshold_root() - MAE_SIGMA2_THRESHOLD).abs() < 1e-12);
    }

    #[test]
    fn sigma2_focus_mae_matches_folded_display() {
        for &(d, k) in &[(0.3, 1.0), (1.7, 0.4), (0.0, 2.0), (5.0, 1.0)] {
            let (null, full) = mae_risks(0.0, -1.0, d, k).unwrap();
            let r = d / k;
            let want = k * SQRT_2_OVER_PI - k * norm_pdf(-r) + d * norm_cdf(-r);
            assert!((null - d).abs() < 1e-14);
            assert!((full - want).abs() < 1e-12, "{full} vs {want}");
            assert_eq!(argmin(null, full) == Model::Full, r > MAE_SIGMA2_THRESHOLD);
        }
    }

    #[test]
    fn delta_zero_plug_in() {
        let (t, w, k) = (0.7, -1.3, 0.9);
        let (null, full) = mae_risks(t, w, 0.0, k).unwrap();
        assert!((null - t * SQRT_2_OVER_PI).abs() < 1e-14);
        let want = 0.5 * SQRT_2_OVER_PI * (t + (t * t + w * w * k * k).sqrt());
        assert!((full - want).abs() < 1e-14);
        let (mn, mf) = mse_risks(t, w, 0.0, k).unwrap();
        assert!((mn - t * t).abs() < 1e-15);
        assert!((mf - (t * t + w * w * k * k / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn tau0_limit_is_continuous() {
        for &(w, d, k) in &[(0.8, 1.1, 0.7), (-2.0, 0.4, 1.5), (0.5, 0.0, 1.0)] {
            let exact = mae_risks(0.0, w, d, k).unwrap();
            let near = mae_risks(1e-9, w, d, k).unwrap();
            assert!((exact.0 - near.0).abs() < 1e-7 && (exact.1 - near.1).abs() < 1e-7, "{exact:?} {near:?}");
        }
        assert_eq!(mae_risks(0.0, 0.0, 1.0, 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn equal_mse_risks_when_omega_vanishes() {
        let (a, b) = mse_risks(0.4, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lrt_p_values() {
        assert_eq!(lrt_from_statistic(0.0).p_value, 1.0);
        assert!((lrt_from_statistic(2.705543454095404).p_value - 0.05).abs() < 1e-9);
        assert!(lrt_from_statistic(3.0).p_value < lrt_from_statistic(2.0).p_value);
    }

    #[test]
    fn bad_kappa_is_rejected() {
        assert!(mae_risks(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(mse_risks(1.0, f64::NAN, 1.0, 1.0).is_err());
    }
}
