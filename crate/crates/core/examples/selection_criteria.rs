//! Runs every selection criterion on a cohort and prints the criterion
//! table; optionally writes the full JSON report.
//!
//! ```text
//! cargo run --release --example selection_criteria [DATA.csv] [report.json]
//! ```

use std::path::PathBuf;

use ggfic::io::{analyze, ingest, write_atomic, AnalysisConfig};

fn main() -> ggfic::Result<()> {
    let mut args = std::env::args().skip(1);
    let data = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_male_90plus.csv"));
    let config = AnalysisConfig { foci: vec!["sigma2".into(), "curvature@100".into()], ..AnalysisConfig::default() };
    let input = ingest(&data, &config.scale()?)?;
    let mut report = analyze(&input.sample, &config)?;
    report.input.file_sha256 = Some(input.file_sha256.clone());

    print!("{}", report.table());
    let info = &report.info;
    println!(
        "delta_hat = {:.4}, kappa_hat = {:.4}, delta/kappa = {:.4}",
        info.delta_hat, info.kappa, info.delta_over_kappa
    );
    println!("aic (plain): Gompertz {:.3}, gamma-Gompertz {:.3}", report.fits.null.aic, report.fits.full.aic);

    if let Some(out) = args.next() {
        write_atomic(&out, report.to_json()?.as_bytes())?;
        println!("wrote {out}");
    }
    Ok(())
}
