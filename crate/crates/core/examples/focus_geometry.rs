//! How the choice of focus changes the FIC decision: prints `τ₀`, `ω` and
//! both MAE scores for several foci on the same fitted cohort.
//!
//! For σ² and the log-hazard curvature `∂μ/∂θ = 0` at the Gompertz model, so
//! `τ₀ = 0` and both reduce to the rule `δ̂/κ̂ > 0.6399`; foci such as the
//! log-hazard or survival at a given age carry their own `τ₀ > 0`.
//!
//! ```text
//! cargo run --release --example focus_geometry [DATA.csv]
//! ```

use std::path::PathBuf;

use ggfic::inference::{fit_full_from_null, fit_null, info_quantities, FitConfig};
use ggfic::io::ingest;
use ggfic::selection::{fic_mae, focus_geometry, FocusSpec, MAE_SIGMA2_THRESHOLD};
use ggfic::AgeScale;

fn main() -> ggfic::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_male_90plus.csv"));
    let scale = AgeScale::default();
    let sample = ingest(&path, &scale)?.sample;
    let cfg = FitConfig::default();
    let null = fit_null(&sample, &cfg)?;
    let full = fit_full_from_null(&sample, &null, &cfg)?;
    let info = info_quantities(&full, sample.n())?;
    println!(
        "n = {}, delta_hat = {:.4}, kappa_hat = {:.4}, ratio {:.4} (threshold {MAE_SIGMA2_THRESHOLD:.4})",
        sample.n(),
        info.delta_hat,
        info.kappa(),
        info.delta_over_kappa()
    );
    println!("{:<16} {:>12} {:>12} {:>12} {:>12}  chosen", "focus", "tau0", "omega", "FIC null", "FIC full");
    for text in ["sigma2", "curvature@95", "curvature@100", "curvature@105", "loghaz@100", "survival@100"] {
        let focus = FocusSpec::parse(text, scale.origin_age)?;
        let g = focus_geometry(&focus, &null, &info)?;
        let r = fic_mae(&g, &info, text)?;
        println!(
            "{text:<16} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}  {}",
            g.tau0,
            g.omega,
            r.score_null,
            r.score_full,
            r.chosen.as_str()
        );
    }
    Ok(())
}
