//! Regenerates the synthetic cohorts in `data/`.
//!
//! The female-like file has 20,917 people who died after 90 under S1
//! (σ² = 0.0625), the male-like file 10,878 under S2 (σ² = 0.03). Ages are
//! rounded up to whole days, as in register data with exact dates.
//!
//! ```text
//! cargo run --release --example make_fixture [OUT_DIR]
//! ```

use std::path::PathBuf;

use ggfic::sim::Scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DAYS_PER_YEAR: f64 = 365.25;

fn write_cohort(path: &PathBuf, preset: &str, n: usize, prefix: &str, seed: u64) -> ggfic::Result<()> {
    let params = Scenario::preset_params(preset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys = params.sample_lifespans(n, &mut rng, Some(30.0))?;
    let mut out = String::from("id,age_at_death\n");
    for (i, y) in ys.iter().enumerate() {
        let days = (y * DAYS_PER_YEAR).ceil();
        out.push_str(&format!("{prefix}{:05},{:.6}\n", i + 1, 60.0 + days / DAYS_PER_YEAR));
    }
    ggfic::io::write_atomic(path, out.as_bytes())?;
    println!("{}: {n} rows from {preset}", path.display());
    Ok(())
}

fn main() -> ggfic::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    write_cohort(&dir.join("synthetic_female_90plus.csv"), "S1", 20_917, "F", 20_917)?;
    write_cohort(&dir.join("synthetic_male_90plus.csv"), "S2", 10_878, "M", 10_878)?;
    Ok(())
}
