//! A small Monte Carlo study: how often each criterion picks the
//! gamma-Gompertz model, and the error of the estimate it implies.
//!
//! ```text
//! cargo run --release --example simulate_scenario [S1|S2|S3] [TARGET_N] [REPS]
//! ```

use ggfic::sim::{run_scenario, RunOptions, Scenario};

fn main() -> ggfic::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "S1".into());
    let target: usize = args.next().map(|s| s.parse().expect("TARGET_N")).unwrap_or(5_000);
    let reps: usize = args.next().map(|s| s.parse().expect("REPS")).unwrap_or(40);

    let scenario = Scenario::preset(&name, target, reps, 42)?;
    let outcome = run_scenario(&scenario, &RunOptions::default())?;
    let m = &outcome.metrics;
    println!(
        "{name}: cohort {} at age 60, mean sample {:.0} past 90, {} replications, mean delta/kappa {:.3}",
        m.cohort_size, m.mean_sample_size, m.replications_ok, m.mean_delta_over_kappa
    );
    println!("{:<28} {:>10} {:>8}", "criterion", "P(full)", "se");
    for d in &m.decisions {
        println!("{:<28} {:>10.3} {:>8.3}", d.label, d.proportion_full, d.mc_standard_error);
    }
    println!("LRT statistic exactly zero in {:.1}% of replications", 100.0 * m.lrt_zero_fraction);
    for f in &m.foci {
        println!("\n{} (true value {:.4e}): mean absolute error", f.focus, f.mu_true);
        for e in &f.mae {
            println!("  {:<20} {:.4e} (se {:.1e})", e.estimator, e.mae, e.mc_standard_error);
        }
    }
    Ok(())
}
