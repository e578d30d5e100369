use serde::{Deserialize, Serialize};

use super::dataset::csv_err;
use crate::error::Result;
use crate::inference::{FitResult, Sample};
use crate::model::AgeScale;

/// One single-year age interval `[age, age + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub age: i64,
    pub deaths: u64,
    /// Person-years lived in the interval after the truncation age.
    pub exposure: f64,
    pub rate: f64,
    /// `rate·exp(∓1.96/√deaths)`; absent when there are no deaths.
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    /// Fitted hazards at the interval midpoint.
    pub fitted_gompertz: f64,
    pub fitted_gg: f64,
}

pub const RATES_HEADER: [&str; 8] = ["age", "deaths", "exposure", "rate", "ci_lo", "ci_hi", "fitted_gompertz", "fitted_gg"];

/// Interval index of a death at offset `age` from the first interval; a death
/// exactly on an integer age closes the interval below it.
fn death_bin(rel: f64) -> usize {
    let f = rel.floor();
    if f == rel && rel > 0.0 {
        f as usize - 1
    } else {
        f as usize
    }
}

/// Occurrence-exposure rates with exact person-years from decimal ages.
pub fn rate_table(sample: &Sample, null: &FitResult, full: &FitResult, scale: &AgeScale) -> Result<Vec<RateRow>> {
    let t_age = scale.to_age(sample.truncation());
    let first = t_age.floor();
    let max_age = sample.lifespans().iter().map(|&y| scale.to_age(y)).fold(t_age, f64::max);
    let bins = (max_age - first).ceil().max(1.0) as usize;
    let mut deaths = vec![0u64; bins];
    let mut exposure = vec![0.0f64; bins];
    for &y in sample.lifespans() {
        let age = scale.to_age(y);
        let k = death_bin(age - first).min(bins - 1);
        deaths[k] += 1;
        for (j, e) in exposure.iter_mut().enumerate().take(k + 1) {
            let lo = (first + j as f64).max(t_age);
            let hi = (first + j as f64 + 1.0).min(age);
            if hi > lo {
                *e += hi - lo;
            }
        }
    }
    let mut rows = Vec::new();
    for k in 0..bins {
        if exposure[k] <= 0.0 {
            continue;
        }
        let d = deaths[k];
        let rate = d as f64 / exposure[k];
        let (ci_lo, ci_hi) = if d > 0 {
            let half = 1.96 / (d as f64).sqrt();
            (Some(rate * (-half).exp()), Some(rate * half.exp()))
        } else {
            (None, None)
        };
        let age = first + k as f64;
        let mid = scale.to_offset(age + 0.5).max(0.0);
        rows.push(RateRow {
            age: age as i64,
            deaths: d,
            exposure: exposure[k],
            rate,
            ci_lo,
            ci_hi,
            fitted_gompertz: null.params.hazard(mid)?,
            fitted_gg: full.params.hazard(mid)?,
        });
    }
    Ok(rows)
}

pub fn write_rates_csv<W: std::io::Write>(writer: W, rows: &[RateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RATES_HEADER).map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.age.to_string(),
            r.deaths.to_string(),
            r.exposure.to_string(),
            r.rate.to_string(),
            opt(r.ci_lo),
            opt(r.ci_hi),
            r.fitted_gompertz.to_string(),
            r.fitted_gg.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{fit_full_from_null, fit_null, FitConfig};
    use crate::model::ModelParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fits(sample: &Sample) -> (FitResult, FitResult) {
        let cfg = FitConfig::default();
        let null = fit_null(sample, &cfg).unwrap();
        let full = fit_full_from_null(sample, &null, &cfg).unwrap();
        (null, full)
    }

    #[test]
    fn single_death_row() {
        let sample = Sample::new(vec![30.5, 33.2, 35.7], 30.0).unwrap();
        let (null, full) = fits(&sample);
        let one = Sample::new(vec![30.5], 30.0).unwrap();
        let rows = rate_table(&one, &null, &full, &AgeScale::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].age, rows[0].deaths), (90, 1));
        assert_eq!(rows[0].exposure, 0.5);
        assert_eq!(rows[0].rate, 2.0);
    }

    #[test]
    fn totals_and_conventions() {
        let truth = ModelParams::new(0.013, 0.092, 0.0625).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut ys = truth.sample_lifespans(3000, &mut rng, Some(30.0)).unwrap();
        ys.push(37.0); // death exactly on an integer age
        let sample = Sample::new(ys, 30.0).unwrap();
        let (null, full) = fits(&sample);
        let rows = rate_table(&sample, &null, &full, &AgeScale::default()).unwrap();
        let deaths: u64 = rows.iter().map(|r| r.deaths).sum();
        assert_eq!(deaths as usize, sample.n());
        let exposure: f64 = rows.iter().map(|r| r.exposure).sum();
        let person_years: f64 = sample.lifespans().iter().map(|y| y - 30.0).sum();
        assert!((exposure - person_years).abs() < 1e-9 * person_years.max(1.0));
        for r in &rows {
            assert!(r.exposure > 0.0);
            assert_eq!(r.rate, r.deaths as f64 / r.exposure);
            assert_eq!(r.ci_lo.is_none(), r.deaths == 0);
        }
    }
}
