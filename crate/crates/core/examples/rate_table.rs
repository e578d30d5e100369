//! Single-year occurrence-exposure death rates with 95% intervals and the
//! fitted hazards of both models, ready for plotting on a log scale.
//!
//! ```text
//! cargo run --release --example rate_table [DATA.csv] [rates.csv]
//! ```

use std::path::PathBuf;

use ggfic::inference::{fit_full_from_null, fit_null, FitConfig};
use ggfic::io::{ingest, rate_table, write_atomic, write_rates_csv};
use ggfic::AgeScale;

fn main() -> ggfic::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_female_90plus.csv"));
    let scale = AgeScale::default();
    let sample = ingest(&path, &scale)?.sample;
    let cfg = FitConfig::default();
    let null = fit_null(&sample, &cfg)?;
    let full = fit_full_from_null(&sample, &null, &cfg)?;
    let rows = rate_table(&sample, &null, &full, &scale)?;

    println!("{:>4} {:>7} {:>11} {:>8} {:>17} {:>9} {:>9}", "age", "deaths", "exposure", "rate", "95% interval", "Gompertz", "gamma-G");
    for r in &rows {
        let ci = match (r.ci_lo, r.ci_hi) {
            (Some(lo), Some(hi)) => format!("[{lo:.3}, {hi:.3}]"),
            _ => "-".into(),
        };
        println!(
            "{:>4} {:>7} {:>11.2} {:>8.4} {:>17} {:>9.4} {:>9.4}",
            r.age, r.deaths, r.exposure, r.rate, ci, r.fitted_gompertz, r.fitted_gg
        );
    }
    if let Some(out) = args.next() {
        let mut buf = Vec::new();
        write_rates_csv(&mut buf, &rows)?;
        write_atomic(&out, &buf)?;
        println!("wrote {out}");
    }
    Ok(())
}
