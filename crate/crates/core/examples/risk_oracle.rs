//! Checks the closed-form limiting MAE and MSE risks against direct
//! simulation of the limit experiment on random geometries.
//!
//! ```text
//! cargo run --release --example risk_oracle [GEOMETRIES] [DRAWS]
//! ```

use ggfic::sim::{mae_oracle_study, random_geometries};

fn main() -> ggfic::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map(|s| s.parse().expect("GEOMETRIES")).unwrap_or(10);
    let draws: usize = args.next().map(|s| s.parse().expect("DRAWS")).unwrap_or(200_000);
    let rows = mae_oracle_study(&random_geometries(count, 7), draws, 7)?;
    println!(
        "{:>6} {:>7} {:>6} {:>6} | {:>9} {:>9} | {:>9} {:>9} | {:>8}",
        "tau0", "omega", "delta", "kappa", "MAE null", "MAE full", "MC null", "MC full", "max gap"
    );
    for r in &rows {
        let g = r.geometry;
        println!(
            "{:>6.3} {:>7.3} {:>6.3} {:>6.3} | {:>9.5} {:>9.5} | {:>9.5} {:>9.5} | {:>8.5}",
            g.tau0, g.omega, g.delta, g.kappa, r.mae_null_closed, r.mae_full_closed, r.mae_null_mc, r.mae_full_mc, r.max_relative_gap
        );
    }
    Ok(())
}
