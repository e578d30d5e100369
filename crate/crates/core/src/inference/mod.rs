//! Maximum likelihood for the Gompertz (null) and gamma-Gompertz (full)
//! models under common left truncation.
//!
//! Both fits optimize over log-parameters with BFGS seeded by the analytic
//! Hessian, falling back to Nelder–Mead when BFGS stalls. The full fit runs
//! from a grid of σ² starting values and is compared against the σ² = 0
//! boundary explicitly; it never relies on `ln σ² → −∞` to find the edge.

mod info;
pub mod likelihood;

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

pub use info::{expected_information, info_quantities, info_quantities_at, InfoPoint, InfoQuantities};
pub use likelihood::{loglik, loglik_derivs, LogLikDerivs};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::optim::{bfgs, nelder_mead, OptimOptions, OptimOutcome};

/// Individual lifespans (years since origin) sharing one truncation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    lifespans: Vec<f64>,
    truncation: f64,
}

impl Sample {
    pub fn new(lifespans: Vec<f64>, truncation: f64) -> Result<Self> {
        if !(truncation.is_finite() && truncation >= 0.0) {
            return Err(Error::InvalidArgument(format!("truncation must be finite and >= 0, got {truncation}")));
        }
        if lifespans.is_empty() {
            return Err(Error::InvalidArgument("sample is empty".into()));
        }
        if let Some((i, &y)) = lifespans.iter().enumerate().find(|(_, &y)| !(y.is_finite() && y > truncation)) {
            return Err(Error::InvalidArgument(format!(
                "lifespan #{i} = {y} does not exceed the truncation point {truncation}"
            )));
        }
        Ok(Sample { lifespans, truncation })
    }

    pub fn lifespans(&self) -> &[f64] {
        &self.lifespans
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn n(&self) -> usize {
        self.lifespans.len()
    }

    /// Empirical `p`-quantile (linear interpolation between order statistics).
    pub fn quantile(&self, p: f64) -> f64 {
        let mut sorted = self.lifespans.clone();
        sorted.sort_by(f64::total_cmp);
        let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Gompertz, σ² fixed at 0.
    Null,
    /// Gamma-Gompertz.
    Full,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Null => "null",
            Model::Full => "full",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub sigma2_starts: Vec<f64>,
    pub optim: OptimOptions,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { sigma2_starts: vec![1e-6, 1e-3, 0.01, 0.05, 0.1, 0.25], optim: OptimOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: Model,
    pub params: ModelParams,
    pub loglik: f64,
    /// Log-likelihood Hessian at the optimum in natural coordinates:
    /// 2×2 over `(a, b)` for the null model, 3×3 over `(a, b, σ²)` for the full one.
    pub hessian: DMatrix<f64>,
    pub converged: bool,
    pub n_starts_used: usize,
    /// Full model only: the σ² = 0 boundary beat every interior optimum.
    pub boundary_hit: bool,
    /// ∞-norm of the per-observation score in optimizer coordinates.
    pub gradient_norm: f64,
}

impl FitResult {
    /// Standard errors from the inverse observed information. `None` when the
    /// information is singular; for a boundary fit only `(a, b)` are reported.
    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        let dim = if self.boundary_hit { 2 } else { self.hessian.nrows() };
        let info = -self.hessian.view((0, 0), (dim, dim)).into_owned();
        let cov = info.try_inverse()?;
        (0..dim).map(|i| (cov[(i, i)] > 0.0).then(|| cov[(i, i)].sqrt())).collect()
    }
}

/// `(â, b̂)` from weighted least squares of log occurrence-exposure rates
/// over single years since truncation.
pub fn gompertz_rate_start(sample: &Sample) -> (f64, f64) {
    const FALLBACK: (f64, f64) = (0.01, 0.1);
    let t = sample.truncation();
    let max = sample.lifespans().iter().cloned().fold(t, f64::max);
    let bins = ((max - t).floor() as usize) + 1;
    let mut deaths = vec![0.0; bins];
    let mut exposure = vec![0.0; bins];
    for &y in sample.lifespans() {
        let k = (((y - t).floor()) as usize).min(bins - 1);
        deaths[k] += 1.0;
        for (j, e) in exposure.iter_mut().enumerate().take(k) {
            let _ = j;
            *e += 1.0;
        }
        exposure[k] += y - t - k as f64;
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..bins {
        if deaths[k] > 0.0 && exposure[k] > 0.0 {
            let w = deaths[k];
            let x = t + k as f64 + 0.5;
            let ly = (deaths[k] / exposure[k]).ln();
            sw += w;
            sx += w * x;
            sy += w * ly;
            sxx += w * x * x;
            sxy += w * x * ly;
        }
    }
    let var = sxx * sw - sx * sx;
    if sw <= 0.0 || var <= 1e-12 * sw * sw {
        return FALLBACK;
    }
    let b = (sxy * sw - sx * sy) / var;
    let ln_a = (sy - b * sx) / sw;
    if !(b.is_finite() && b > 1e-4 && ln_a.is_finite()) || b * max > 600.0 {
        return FALLBACK;
    }
    (ln_a.exp(), b)
}

/// `−ℓ/n` and its gradient in log coordinates `(ln a, ln b[, ln σ²])`.
fn log_objective(sample: &Sample, u: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
    let n = sample.n() as f64;
    let dim = u.len();
    let x: Vec<f64> = u.iter().map(|v| v.exp()).collect();
    if x.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return None;
    }
    let s = if dim == 3 { x[2] } else { 0.0 };
    let d = likelihood::derivs_raw(x[0], x[1], s, sample.lifespans(), sample.truncation()).ok()?;
    let grad = DVector::from_fn(dim, |i, _| -x[i] * d.gradient[i] / n);
    Some((-d.value / n, grad))
}

/// Inverse Hessian of [`log_objective`], if positive definite.
fn log_objective_inverse_hessian(sample: &Sample, u: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = sample.n() as f64;
    let dim = u.len();
    let x: Vec<f64> = u.iter().map(|v| v.exp()).collect();
    let s = if dim == 3 { x[2] } else { 0.0 };
    let d = likelihood::derivs_raw(x[0], x[1], s, sample.lifespans(), sample.truncation()).ok()?;
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let mut v = x[i] * x[j] * d.hessian[(i, j)];
        if i == j {
            v += x[i] * d.gradient[i];
        }
        -v / n
    });
    let chol = h.cholesky()?;
    Some(chol.inverse())
}

fn optimize(sample: &Sample, u0: DVector<f64>, opts: OptimOptions) -> Option<OptimOutcome> {
    let inv_h = log_objective_inverse_hessian(sample, &u0);
    let first = bfgs(|u| log_objective(sample, u), u0.clone(), inv_h, opts);
    match first {
        Some(out) if out.converged => Some(out),
        other => {
            let from = other.as_ref().map(|o| o.x.clone()).unwrap_or(u0);
            let (x_nm, _) = nelder_mead(
                |u| log_objective(sample, u).map(|(f, _)| f).unwrap_or(f64::INFINITY),
                &from,
                0.2,
                4000,
                1e-15,
            );
            let inv_h = log_objective_inverse_hessian(sample, &x_nm);
            let second = bfgs(|u| log_objective(sample, u), x_nm, inv_h, opts);
            match (other, second) {
                (Some(a), Some(b)) => Some(if b.f <= a.f { b } else { a }),
                (a, b) => b.or(a),
            }
        }
    }
}

fn natural_hessian(params: &ModelParams, sample: &Sample, dim: usize) -> Result<(f64, DMatrix<f64>)> {
    let d = loglik_derivs(params, sample)?;
    Ok((d.value, DMatrix::from_fn(dim, dim, |i, j| d.hessian[(i, j)])))
}

/// Maximum likelihood fit of the Gompertz model.
pub fn fit_null(sample: &Sample, config: &FitConfig) -> Result<FitResult> {
    if sample.n() < 2 {
        return Err(Error::InvalidArgument("the Gompertz fit needs at least 2 observations".into()));
    }
    let (a0, b0) = gompertz_rate_start(sample);
    let starts = [(a0, b0), (0.01, 0.1), (a0 * 0.1, b0 * 1.5)];
    let mut best: Option<OptimOutcome> = None;
    let mut used = 0;
    for (i, &(a, b)) in starts.iter().enumerate() {
        // the extra starts only run when the rate-based start failed
        if i > 0 && best.as_ref().is_some_and(|o| o.converged) {
            break;
        }
        let u0 = DVector::from_vec(vec![a.ln(), b.ln()]);
        if let Some(out) = optimize(sample, u0, config.optim) {
            if out.converged {
                used += 1;
            }
            if best.as_ref().map_or(true, |b| out.f < b.f) {
                best = Some(out);
            }
        }
    }
    let Some(out) = best.filter(|o| o.converged) else {
        return Err(Error::Fit { model: "gompertz", diagnostics: "no start reached the gradient tolerance".into() });
    };
    let params = ModelParams::gompertz(out.x[0].exp(), out.x[1].exp())?;
    let (value, hessian) = natural_hessian(&params, sample, 2)?;
    Ok(FitResult {
        model: Model::Null,
        params,
        loglik: value,
        hessian,
        converged: true,
        n_starts_used: used,
        boundary_hit: false,
        gradient_norm: out.grad_norm(),
    })
}

/// Maximum likelihood fit of the gamma-Gompertz model (fits the null model first).
pub fn fit_full(sample: &Sample, config: &FitConfig) -> Result<FitResult> {
    let null = fit_null(sample, config)?;
    fit_full_from_null(sample, &null, config)
}

/// Full fit reusing an existing null fit for starts and the boundary check.
pub fn fit_full_from_null(sample: &Sample, null: &FitResult, config: &FitConfig) -> Result<FitResult> {
    if sample.n() < 3 {
        return Err(Error::InvalidArgument("the gamma-Gompertz fit needs at least 3 observations".into()));
    }
    if config.sigma2_starts.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::InvalidArgument("sigma2 starting values must be positive".into()));
    }
    let (a0, b0) = (null.params.a(), null.params.b());
    let mut best: Option<OptimOutcome> = None;
    let mut used = 0;
    for &s0 in &config.sigma2_starts {
        let u0 = DVector::from_vec(vec![a0.ln(), b0.ln(), s0.ln()]);
        let Some(out) = optimize(sample, u0, config.optim) else { continue };
        if !out.converged {
            continue;
        }
        used += 1;
        if best.as_ref().map_or(true, |b| out.f < b.f) {
            best = Some(out);
        }
    }

    let n = sample.n() as f64;
    let interior = best.and_then(|out| {
        let params = ModelParams::new(out.x[0].exp(), out.x[1].exp(), out.x[2].exp()).ok()?;
        let value = -out.f * n;
        Some((params, value, out.grad_norm()))
    });
    let margin = 1e-12 * null.loglik.abs().max(1.0);
    match interior {
        Some((params, value, gnorm)) if value > null.loglik + margin => {
            let (value, hessian) = natural_hessian(&params, sample, 3)?;
            Ok(FitResult {
                model: Model::Full,
                params,
                loglik: value,
                hessian,
                converged: true,
                n_starts_used: used,
                boundary_hit: false,
                gradient_norm: gnorm,
            })
        }
        _ => {
            if used == 0 && !null.converged {
                return Err(Error::Fit { model: "gamma-gompertz", diagnostics: "no start converged".into() });
            }
            let params = ModelParams::new(a0, b0, 0.0)?;
            let (_, hessian) = natural_hessian(&params, sample, 3)?;
            Ok(FitResult {
                model: Model::Full,
                params,
                loglik: null.loglik,
                hessian,
                converged: true,
                n_starts_used: used,
                boundary_hit: true,
                gradient_norm: null.gradient_norm,
            })
        }
    }
}

/// Full 3×3 natural-coordinate Hessian at arbitrary parameters.
pub fn hessian_at(params: &ModelParams, sample: &Sample) -> Result<Matrix3<f64>> {
    Ok(loglik_derivs(params, sample)?.hessian)
}
