//! Gompertz versus gamma-Gompertz model selection for left-truncated
//! lifespan data.
//!
//! Lifespans are measured in years since an origin age (60 by default), so a
//! sample of people who died after 90 is truncated at `y = 30`. The null model
//! is Gompertz, `h(y) = a·e^{by}`; the full model adds a gamma frailty with
//! variance `σ² ≥ 0`, which makes the population hazard level off at `b/σ²`.
//! Because the null sits on the boundary `σ² = 0`, the selection rules here
//! account for the half-normal behaviour of `√n σ̂²`:
//!
//! * [`selection::fic_mae`]: focused information criterion on mean absolute error,
//! * [`selection::pretest`]: MSE tolerance-radius test `δ̂/κ̂ > 0.8399`,
//! * [`selection::aic_star`]: AIC with a boundary-corrected penalty,
//! * [`selection::lrt`]: likelihood ratio test against the ½χ²₀ + ½χ²₁ mixture.
//!
//! [`sim`] runs seeded Monte Carlo studies of these rules, and [`io`] handles
//! CSV ingestion, JSON reports and rate tables. The `examples/` directory has
//! one runnable program per capability.

pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod optim;
pub mod selection;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
pub use inference::{fit_full, fit_null, info_quantities, FitConfig, FitResult, InfoQuantities, Model, Sample};
pub use model::{AgeScale, ModelParams};
pub use selection::{FocusGeometry, FocusSpec, SelectionReport};
