use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{FitResult, InfoQuantities};
use crate::model::ModelParams;

/// A scalar focus parameter `μ(a, b, σ²)`. Ages are in years since origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocusSpec {
    Sigma2,
    /// `d²/dy² ln h(y)`.
    LogHazardCurvature(f64),
    LogHazard(f64),
    Survival(f64),
}

impl FocusSpec {
    pub fn age_offset(&self) -> Option<f64> {
        match *self {
            FocusSpec::Sigma2 => None,
            FocusSpec::LogHazardCurvature(y) | FocusSpec::LogHazard(y) | FocusSpec::Survival(y) => Some(y),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.age_offset() {
            Some(y) if !(y.is_finite() && y >= 0.0) => {
                Err(Error::InvalidArgument(format!("focus age offset must be finite and >= 0, got {y}")))
            }
            _ => Ok(()),
        }
    }

    /// Parses `sigma2`, `curvature@AGE`, `loghaz@AGE` or `survival@AGE`, where
    /// `AGE` is a calendar age converted with `origin_age`.
    pub fn parse(text: &str, origin_age: f64) -> Result<Self> {
        let text = text.trim();
        if text == "sigma2" {
            return Ok(FocusSpec::Sigma2);
        }
        let (kind, age) = text
            .split_once('@')
            .ok_or_else(|| Error::Config(format!("focus `{text}`: expected sigma2|curvature@Y|loghaz@Y|survival@Y")))?;
        let age: f64 = age.trim().parse().map_err(|_| Error::Config(format!("focus `{text}`: bad age `{age}`")))?;
        let y = age - origin_age;
        let spec = match kind.trim() {
            "curvature" => FocusSpec::LogHazardCurvature(y),
            "loghaz" => FocusSpec::LogHazard(y),
            "survival" => FocusSpec::Survival(y),
            other => return Err(Error::Config(format!("focus `{text}`: unknown kind `{other}`"))),
        };
        spec.validate().map_err(|_| Error::Config(format!("focus `{text}`: age {age} lies before the origin age {origin_age}")))?;
        Ok(spec)
    }

    /// Inverse of [`FocusSpec::parse`].
    pub fn label(&self, origin_age: f64) -> String {
        let tag = match self {
            FocusSpec::Sigma2 => return "sigma2".into(),
            FocusSpec::LogHazardCurvature(_) => "curvature",
            FocusSpec::LogHazard(_) => "loghaz",
            FocusSpec::Survival(_) => "survival",
        };
        format!("{tag}@{}", self.age_offset().unwrap() + origin_age)
    }

    pub fn value(&self, params: &ModelParams) -> Result<f64> {
        match *self {
            FocusSpec::Sigma2 => Ok(params.sigma2()),
            FocusSpec::LogHazardCurvature(y) => {
                if y < 0.0 {
                    return Err(Error::InvalidArgument(format!("focus age offset {y} < 0")));
                }
                Ok(params.log_hazard_curvature(y))
            }
            FocusSpec::LogHazard(y) => params.log_hazard(y),
            FocusSpec::Survival(y) => params.survival(y),
        }
    }

    /// `(∂μ/∂(a, b), ∂μ/∂σ²)` at `(a, b, σ² = 0)`.
    pub fn gradient_at_null(&self, a: f64, b: f64) -> Result<(Vector2<f64>, f64)> {
        self.validate()?;
        let base = ModelParams::gompertz(a, b)?;
        Ok(match *self {
            FocusSpec::Sigma2 => (Vector2::zeros(), 1.0),
            FocusSpec::LogHazardCurvature(y) => {
                base.log_hazard(y)?;
                (Vector2::zeros(), -a * b * (b * y).exp())
            }
            FocusSpec::LogHazard(y) => {
                base.log_hazard(y)?;
                (Vector2::new(1.0 / a, y), -base.cumulative_baseline(y))
            }
            FocusSpec::Survival(y) => {
                let s = base.survival(y)?;
                let g = base.cumulative_baseline(y);
                let dg_db = a * y * (b * y).exp() / b - g / b;
                (Vector2::new(-s * g / a, -s * dg_db), s * g * g / 2.0)
            }
        })
    }
}

impl fmt::Display for FocusSpec {
    /// Label on the default age-60 origin.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label(60.0))
    }
}

/// Focus quantities at the null fit that drive the asymptotic risks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusGeometry {
    pub mu_null: f64,
    pub dmu_dtheta: [f64; 2],
    pub dmu_dgamma: f64,
    /// `√(∂μ/∂θᵀ J₀₀⁻¹ ∂μ/∂θ)`.
    pub tau0: f64,
    /// `J₁₀ J₀₀⁻¹ ∂μ/∂θ − ∂μ/∂σ²`.
    pub omega: f64,
}

pub fn focus_geometry(focus: &FocusSpec, fit_null: &FitResult, info: &InfoQuantities) -> Result<FocusGeometry> {
    let (a, b) = (fit_null.params.a(), fit_null.params.b());
    let (dtheta, dgamma) = focus.gradient_at_null(a, b)?;
    let j00_inv = info
        .j00
        .try_inverse()
        .ok_or_else(|| Error::Numerical("J00 is singular while forming the focus geometry".into()))?;
    let tau0_sq = (dtheta.transpose() * j00_inv * dtheta)[(0, 0)];
    let omega = (info.j10 * j00_inv * dtheta)[(0, 0)] - dgamma;
    if !(tau0_sq.is_finite() && omega.is_finite()) {
        return Err(Error::Numerical(format!("focus {focus}: non-finite tau0^2 or omega")));
    }
    Ok(FocusGeometry {
        mu_null: focus.value(&fit_null.params)?,
        dmu_dtheta: [dtheta[0], dtheta[1]],
        dmu_dgamma: dgamma,
        tau0: tau0_sq.max(0.0).sqrt(),
        omega,
    })
}
