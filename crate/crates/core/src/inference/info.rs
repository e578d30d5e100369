use nalgebra::{Matrix2, Matrix3, RowVector2};

use super::likelihood::observation_derivs;
use super::{loglik_derivs, FitResult, Model, Sample};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Where the per-observation information `J = −H/n` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoPoint {
    /// `(â, b̂, σ̂²)` of the full fit.
    #[default]
    FullMle,
    /// `(â_null, b̂_null, 0)`; for sensitivity checks.
    NullFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoQuantities {
    pub j_full: Matrix3<f64>,
    /// `(J_full⁻¹)₃₃`, the asymptotic variance of `√n σ̂²`.
    pub kappa2: f64,
    /// `√n σ̂²`.
    pub delta_hat: f64,
    pub j00: Matrix2<f64>,
    pub j10: RowVector2<f64>,
    pub n: usize,
    pub point: InfoPoint,
}

impl InfoQuantities {
    pub fn kappa(&self) -> f64 {
        self.kappa2.sqrt()
    }

    pub fn delta_over_kappa(&self) -> f64 {
        self.delta_hat / self.kappa()
    }

    /// Assembles the quantities from a per-observation information matrix.
    pub fn from_information(j_full: Matrix3<f64>, sigma2_hat: f64, n: usize, point: InfoPoint) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let asym = (j_full - j_full.transpose()).amax();
        if asym > 1e-10 * j_full.amax().max(1.0) {
            return Err(Error::Numerical(format!("information matrix not symmetric (max gap {asym:e})")));
        }
        let j00 = j_full.fixed_view::<2, 2>(0, 0).into_owned();
        let j10 = j_full.fixed_view::<1, 2>(2, 0).into_owned();
        let j00_inv = j00.try_inverse().ok_or_else(|| {
            Error::Numerical(format!("J00 is singular (condition number {:e})", condition_number(&j00)))
        })?;
        // κ² by the Schur complement, which equals (J⁻¹)₃₃ and avoids a 3×3 inverse
        let schur = j_full[(2, 2)] - (j10 * j00_inv * j10.transpose())[(0, 0)];
        let kappa2 = 1.0 / schur;
        if !(kappa2.is_finite() && kappa2 > 0.0) {
            return Err(Error::Numerical(format!(
                "kappa^2 = {kappa2:e} is not positive (J_full condition number {:e})",
                condition_number(&j_full)
            )));
        }
        Ok(InfoQuantities { j_full, kappa2, delta_hat: (n as f64).sqrt() * sigma2_hat, j00, j10, n, point })
    }
}

fn condition_number<const D: usize>(m: &nalgebra::SMatrix<f64, D, D>) -> f64 {
    let sv = nalgebra::DMatrix::from_column_slice(D, D, m.as_slice()).singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// `J_full = −H/n` at the full MLE, `κ̂²`, `δ̂`.
pub fn info_quantities(fit_full: &FitResult, n: usize) -> Result<InfoQuantities> {
    if fit_full.model != Model::Full || fit_full.hessian.nrows() != 3 {
        return Err(Error::InvalidArgument("info_quantities needs a full-model fit".into()));
    }
    if !fit_full.converged {
        return Err(Error::InvalidArgument("full fit did not converge".into()));
    }
    let j = Matrix3::from_fn(|i, k| -fit_full.hessian[(i, k)] / n as f64);
    InfoQuantities::from_information(j, fit_full.params.sigma2(), n, InfoPoint::FullMle)
}

/// As [`info_quantities`] with a choice of evaluation point. `δ̂` always
/// comes from the full fit.
pub fn info_quantities_at(point: InfoPoint, sample: &Sample, null: &FitResult, full: &FitResult) -> Result<InfoQuantities> {
    match point {
        InfoPoint::FullMle => info_quantities(full, sample.n()),
        InfoPoint::NullFit => {
            let at = ModelParams::new(null.params.a(), null.params.b(), 0.0)?;
            let h = loglik_derivs(&at, sample)?.hessian;
            let n = sample.n();
            InfoQuantities::from_information(-h / n as f64, full.params.sigma2(), n, InfoPoint::NullFit)
        }
    }
}

/// Expected per-observation information at `params` for a sample truncated at
/// `truncation`, by composite Simpson quadrature over the conditional density.
pub fn expected_information(params: &ModelParams, truncation: f64) -> Result<Matrix3<f64>> {
    let s_t = params.survival(truncation)?;
    let upper = params.inverse_survival(1e-16 * s_t)?;
    const PANELS: usize = 8000;
    let h = (upper - truncation) / PANELS as f64;
    let mut acc = Matrix3::zeros();
    for k in 0..=PANELS {
        let y = truncation + k as f64 * h;
        let w = if k == 0 || k == PANELS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = params.density(y)? / s_t;
        if f == 0.0 {
            continue;
        }
        // the observation itself must lie strictly above the truncation point
        let y_eval = if k == 0 { truncation + 1e-12 * truncation.max(1.0) } else { y };
        let d = observation_derivs(params.a(), params.b(), params.sigma2(), y_eval, truncation)?;
        acc -= d.hessian * (w * f);
    }
    Ok(acc * (h / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{fit_full, FitConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kappa2_is_inverse_corner() {
        let j = Matrix3::new(2.0, 0.3, -0.2, 0.3, 1.5, 0.4, -0.2, 0.4, 0.9);
        let q = InfoQuantities::from_information(j, 0.01, 400, InfoPoint::FullMle).unwrap();
        let inv = j.try_inverse().unwrap();
        assert!((q.kappa2 - inv[(2, 2)]).abs() < 1e-12);
        assert!((q.delta_hat - 0.2).abs() < 1e-15);
    }

    #[test]
    fn singular_blocks_are_reported() {
        let j = Matrix3::new(1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let err = InfoQuantities::from_information(j, 0.0, 10, InfoPoint::FullMle).unwrap_err();
        assert!(err.to_string().contains("condition number"));
    }

    #[test]
    fn observed_information_approaches_expected() {
        let truth = ModelParams::new(0.013, 0.092, 0.0625).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ys = truth.sample_lifespans(20_000, &mut rng, Some(30.0)).unwrap();
        let sample = Sample::new(ys, 30.0).unwrap();
        let obs = -loglik_derivs(&truth, &sample).unwrap().hessian / sample.n() as f64;
        let exp = expected_information(&truth, 30.0).unwrap();
        for i in 0..3 {
            let rel = (obs[(i, i)] / exp[(i, i)] - 1.0).abs();
            assert!(rel < 0.1, "diag {i}: observed {} expected {}", obs[(i, i)], exp[(i, i)]);
        }
        let fit = fit_full(&sample, &FitConfig::default()).unwrap();
        let q = info_quantities(&fit, sample.n()).unwrap();
        assert!((q.j_full - q.j_full.transpose()).amax() < 1e-10);
        if fit.boundary_hit {
            assert_eq!(q.delta_hat, 0.0);
        }
    }
}
