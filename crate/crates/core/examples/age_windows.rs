//! Widening the age window: the same cohorts (calibrated to `TARGET_N`
//! people past 90) observed from 80, 85 or 90 onwards.
//!
//! ```text
//! cargo run --release --example age_windows [TARGET_N] [REPS]
//! ```

use ggfic::sim::{run_scenario, Criterion, RunOptions, Scenario};
use ggfic::FocusSpec;

fn main() -> ggfic::Result<()> {
    let mut args = std::env::args().skip(1);
    let target: usize = args.next().map(|s| s.parse().expect("TARGET_N")).unwrap_or(3_000);
    let reps: usize = args.next().map(|s| s.parse().expect("REPS")).unwrap_or(30);
    let opts = RunOptions {
        criteria: vec![Criterion::FicMae, Criterion::Lrt],
        foci: vec![FocusSpec::LogHazardCurvature(40.0)],
        ..RunOptions::default()
    };
    println!("{:<6} {:>12} {:>14} {:>10}", "window", "mean n", "FIC curvature", "LRT 5%");
    for window in [90.0, 85.0, 80.0] {
        let mut scenario = Scenario::preset("S1", target, reps, 11)?.with_window(window);
        scenario.calibration_age = Some(90.0);
        let m = run_scenario(&scenario, &opts)?.metrics;
        let p = |label: &str| m.decision(label).map(|d| d.proportion_full).unwrap_or(f64::NAN);
        println!("{:<6} {:>12.0} {:>14.3} {:>10.3}", format!("{window}+"), m.mean_sample_size, p("fic_mae[curvature@100]"), p("lrt"));
    }
    Ok(())
}
