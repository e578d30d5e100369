//! The gamma-Gompertz family.
//!
//! Ages are measured as `y` years since the model origin (age 60 by
//! default). With frailty variance `σ²` the marginal hazard is
//!
//! ```text
//! h(y) = a·e^{by} / (1 + σ²·G(y)),      G(y) = (a/b)(e^{by} − 1)
//! S(y) = (1 + σ²·G(y))^{−1/σ²}
//! ```
//!
//! and `σ² = 0` is the Gompertz sub-model. Below [`SIGMA2_SERIES_THRESHOLD`]
//! the cumulative hazard `−ln S = ln(1 + σ²G)/σ²` is replaced by its series
//! `G − σ²G²/2 + σ⁴G³/3`, whose truncation error is `O(σ⁶G⁴)`.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// σ² below which the cumulative hazard uses its truncated series.
pub const SIGMA2_SERIES_THRESHOLD: f64 = 1e-5;

/// Largest admissible `b·y`; `e^{by}` beyond 1e300 is treated as overflow.
pub(crate) const MAX_EXPONENT: f64 = 690.775_527_898_213_7;

/// Parameters `(a, b, σ²)` of the gamma-Gompertz family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    a: f64,
    b: f64,
    sigma2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    sigma2: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.a, raw.b, raw.sigma2)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams { a: p.a, b: p.b, sigma2: p.sigma2 }
    }
}

impl ModelParams {
    pub fn new(a: f64, b: f64, sigma2: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidArgument(format!("a must be positive and finite, got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidArgument(format!("b must be positive and finite, got {b}")));
        }
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma2 must be non-negative and finite, got {sigma2}"
            )));
        }
        Ok(ModelParams { a, b, sigma2 })
    }

    /// The Gompertz sub-model (`σ² = 0`).
    pub fn gompertz(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 0.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn is_gompertz(&self) -> bool {
        self.sigma2 == 0.0
    }

    fn check_age(&self, y: f64) -> Result<()> {
        if !(y.is_finite() && y >= 0.0) {
            return Err(Error::InvalidArgument(format!("age offset y must be finite and >= 0, got {y}")));
        }
        if self.b * y > MAX_EXPONENT {
            return Err(Error::Domain { y, reason: "e^{by} exceeds 1e300".into() });
        }
        Ok(())
    }

    /// Cumulative baseline hazard `G(y) = (a/b)(e^{by} − 1)`.
    pub fn cumulative_baseline(&self, y: f64) -> f64 {
        self.a * (self.b * y).exp_m1() / self.b
    }

    /// Marginal hazard at `y`.
    pub fn hazard(&self, y: f64) -> Result<f64> {
        Ok(self.log_hazard(y)?.exp())
    }

    /// `ln h(y) = ln a + by − ln(1 + σ²G(y))`.
    pub fn log_hazard(&self, y: f64) -> Result<f64> {
        self.check_age(y)?;
        let g = self.cumulative_baseline(y);
        Ok(self.a.ln() + self.b * y - (self.sigma2 * g).ln_1p())
    }

    /// Survival probability `S(y)`.
    pub fn survival(&self, y: f64) -> Result<f64> {
        Ok(self.log_survival(y)?.exp())
    }

    pub fn log_survival(&self, y: f64) -> Result<f64> {
        self.check_age(y)?;
        Ok(-cumulative_hazard(self.sigma2, self.cumulative_baseline(y)))
    }

    /// Density `f(y) = h(y)·S(y)`.
    pub fn density(&self, y: f64) -> Result<f64> {
        Ok(self.log_density(y)?.exp())
    }

    /// `ln f(y) = ln a + by − (1 + 1/σ²)·ln(1 + σ²G(y))`, evaluated as
    /// `ln h(y) + ln S(y)` so the small-σ² series applies.
    pub fn log_density(&self, y: f64) -> Result<f64> {
        self.check_age(y)?;
        let g = self.cumulative_baseline(y);
        Ok(self.a.ln() + self.b * y - (self.sigma2 * g).ln_1p() - cumulative_hazard(self.sigma2, g))
    }

    /// Second derivative of `ln h` with respect to age.
    ///
    /// Closed form `−σ²·a·e^{by}·(b − σ²a) / (1 + σ²G)²`, written in terms of
    /// `e^{−by}` so it stays finite for any `y ≥ 0`. Exactly zero at `σ² = 0`.
    pub fn log_hazard_curvature(&self, y: f64) -> f64 {
        let s = self.sigma2;
        if s == 0.0 {
            return 0.0;
        }
        let w = (-self.b * y).exp();
        let c = s * self.a / self.b;
        let denom = w + c * (1.0 - w);
        -s * self.a * (self.b - s * self.a) * w / (denom * denom)
    }

    /// Plateau `b/σ²` approached by the hazard as `y → ∞` (infinite for Gompertz).
    pub fn hazard_plateau(&self) -> f64 {
        if self.sigma2 == 0.0 {
            f64::INFINITY
        } else {
            self.b / self.sigma2
        }
    }

    /// Age `y` at which the survival function equals `v ∈ (0, 1]`.
    pub fn inverse_survival(&self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidArgument(format!("survival level must lie in (0, 1], got {v}")));
        }
        let s = self.sigma2;
        let g = if s == 0.0 { -v.ln() } else { (-s * v.ln()).exp_m1() / s };
        Ok((self.b * g / self.a).ln_1p() / self.b)
    }

    /// `y` with `1 − S(y) = p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("probability must lie in [0, 1), got {p}")));
        }
        self.inverse_survival(1.0 - p)
    }

    /// `n` i.i.d. lifespans by inversion. With `conditional_on = Some(y_L)`
    /// the draws come from `Y | Y > y_L`, obtained by scaling the uniform
    /// survival level by `S(y_L)`.
    pub fn sample_lifespans<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        conditional_on: Option<f64>,
    ) -> Result<Vec<f64>> {
        let (floor, level) = match conditional_on {
            Some(y_l) => (y_l, self.survival(y_l)?),
            None => (0.0, 1.0),
        };
        if level <= 0.0 {
            return Err(Error::Domain { y: floor, reason: "survival underflows to zero".into() });
        }
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u: f64 = rng.sample(Open01);
            let y = self.inverse_survival(level * u)?;
            if conditional_on.is_none() || y > floor {
                out.push(y);
            }
        }
        Ok(out)
    }
}

/// `−ln S = ln(1 + σ²G)/σ²` with the series branch below the threshold.
pub(crate) fn cumulative_hazard(s: f64, g: f64) -> f64 {
    if s < SIGMA2_SERIES_THRESHOLD {
        g * (1.0 - s * g / 2.0 + s * s * g * g / 3.0)
    } else {
        (s * g).ln_1p() / s
    }
}

/// Calendar-age frame: `origin_age` maps to `y = 0`, observation starts at
/// `truncation_age`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeScale {
    pub origin_age: f64,
    pub truncation_age: f64,
}

impl AgeScale {
    pub fn new(origin_age: f64, truncation_age: f64) -> Result<Self> {
        if !(origin_age.is_finite() && truncation_age.is_finite()) {
            return Err(Error::InvalidArgument("ages must be finite".into()));
        }
        if truncation_age < origin_age {
            return Err(Error::InvalidArgument(format!(
                "truncation age {truncation_age} precedes origin age {origin_age}"
            )));
        }
        Ok(AgeScale { origin_age, truncation_age })
    }

    /// Truncation point in years since origin.
    pub fn truncation_offset(&self) -> f64 {
        self.truncation_age - self.origin_age
    }

    pub fn to_offset(&self, age: f64) -> f64 {
        age - self.origin_age
    }

    pub fn to_age(&self, y: f64) -> f64 {
        y + self.origin_age
    }
}

impl Default for AgeScale {
    fn default() -> Self {
        AgeScale { origin_age: 60.0, truncation_age: 90.0 }
    }
}
