//! Boundary-aware model selection between the Gompertz and gamma-Gompertz
//! models: focus geometry, FIC on the MAE and MSE scales, the pre-test,
//! AIC* and the mixture LRT, plus local-power formulas.

mod criteria;
mod focus;
mod power;

pub use criteria::{
    aic, aic_star, argmin, fic_mae, fic_mse, lrt, lrt_from_statistic, mae_risks, mae_sigma2_threshold_root,
    mse_risks, pretest, pretest_threshold_root, Intermediates, LrtResult, SelectionReport, LRT_ALPHA,
    MAE_SIGMA2_THRESHOLD, PRETEST_THRESHOLD,
};
pub use focus::{focus_geometry, FocusGeometry, FocusSpec};
pub use power::{lrt_local_power, mae_sigma2_local_power, pretest_local_power};
