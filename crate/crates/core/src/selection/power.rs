//! Local power under `δ = √n σ²` fixed, as functions of `r = δ/κ`.

use super::criteria::{MAE_SIGMA2_THRESHOLD, PRETEST_THRESHOLD};
use crate::error::{Error, Result};
use crate::special::{norm_quantile, norm_sf};

/// Power of the level-`alpha` mixture LRT: `1 − Φ(Φ⁻¹(1−α) − r)`.
pub fn lrt_local_power(alpha: f64, r: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if r == 0.0 {
        // the quantile/tail round trip is off by a few ulps; the level is exact by definition
        return Ok(alpha);
    }
    Ok(norm_sf(-norm_quantile(alpha) - r))
}

/// Probability that the pre-test picks the full model: `1 − Φ(0.8399 − r)`.
pub fn pretest_local_power(r: f64) -> f64 {
    norm_sf(PRETEST_THRESHOLD - r)
}

/// Same for the MAE rule of the σ² focus: `1 − Φ(0.6399 − r)`.
pub fn mae_sigma2_local_power(r: f64) -> f64 {
    norm_sf(MAE_SIGMA2_THRESHOLD - r)
}
