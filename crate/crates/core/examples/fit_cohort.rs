//! Fits the Gompertz and gamma-Gompertz models to a cohort of people who
//! died after 90 and tests for frailty with the mixture LRT.
//!
//! ```text
//! cargo run --release --example fit_cohort [DATA.csv]
//! ```

use std::path::PathBuf;

use ggfic::inference::{fit_full_from_null, fit_null, FitConfig};
use ggfic::io::ingest;
use ggfic::selection::lrt;
use ggfic::AgeScale;

fn main() -> ggfic::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_female_90plus.csv"));
    let scale = AgeScale::new(60.0, 90.0)?;
    let data = ingest(&path, &scale)?;
    println!("{}: {} lifespans past age 90 ({} rows rejected)", path.display(), data.sample.n(), data.rejected.len());

    let cfg = FitConfig::default();
    let null = fit_null(&data.sample, &cfg)?;
    let full = fit_full_from_null(&data.sample, &null, &cfg)?;

    let se = |fit: &ggfic::FitResult| fit.standard_errors().unwrap_or_default();
    let (sn, sf) = (se(&null), se(&full));
    println!("Gompertz        a = {:.5e} ({:.1e})  b = {:.5} ({:.1e})  loglik {:.3}", null.params.a(), sn[0], null.params.b(), sn[1], null.loglik);
    print!("gamma-Gompertz  a = {:.5e} ({:.1e})  b = {:.5} ({:.1e})", full.params.a(), sf[0], full.params.b(), sf[1]);
    if full.boundary_hit {
        println!("  sigma2 = 0 (boundary)  loglik {:.3}", full.loglik);
    } else {
        println!("  sigma2 = {:.5} ({:.1e})  loglik {:.3}", full.params.sigma2(), sf[2], full.loglik);
        println!("hazard plateau b/sigma2 = {:.3} per year", full.params.hazard_plateau());
    }

    let t = lrt(&full, &null)?;
    println!("LRT: statistic {:.4}, p-value {:.4} (half chi-square(1) tail)", t.statistic, t.p_value);
    Ok(())
}
