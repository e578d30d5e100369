use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::AnalysisConfig;
use super::dataset::hex;
use crate::error::{Error, Result};
use crate::inference::{fit_full_from_null, fit_null, info_quantities_at, FitResult, InfoPoint, InfoQuantities, Model, Sample};
use crate::selection::{aic, aic_star, fic_mae, focus_geometry, lrt, pretest, FocusGeometry, LrtResult, SelectionReport};
use crate::sim::Criterion;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

impl Default for Software {
    fn default() -> Self {
        Software { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub n: usize,
    pub origin_age: f64,
    pub truncation_age: f64,
    pub min_age: f64,
    pub max_age: f64,
    /// SHA-256 over the lifespans (little-endian f64) and truncation point.
    pub sample_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_sha256: Option<String>,
    #[serde(default)]
    pub rejected_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model: Model,
    pub a: f64,
    pub b: f64,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    /// Standard errors of `(a, b[, σ²])`; only `(a, b)` at a boundary fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<Vec<f64>>,
    /// False at a boundary fit, where `σ̂²` is not asymptotically normal.
    pub standard_errors_normal: bool,
    pub boundary_hit: bool,
    pub converged: bool,
    pub n_starts_used: usize,
    pub gradient_norm: f64,
    pub hessian: Vec<Vec<f64>>,
}

impl FitSummary {
    pub fn new(fit: &FitResult) -> Self {
        FitSummary {
            model: fit.model,
            a: fit.params.a(),
            b: fit.params.b(),
            sigma2: fit.params.sigma2(),
            loglik: fit.loglik,
            aic: aic(fit),
            standard_errors: fit.standard_errors(),
            standard_errors_normal: !fit.boundary_hit,
            boundary_hit: fit.boundary_hit,
            converged: fit.converged,
            n_starts_used: fit.n_starts_used,
            gradient_norm: fit.gradient_norm,
            hessian: fit.hessian.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub null: FitSummary,
    pub full: FitSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoSummary {
    pub point: InfoPoint,
    pub j_full: [[f64; 3]; 3],
    pub kappa2: f64,
    pub kappa: f64,
    pub delta_hat: f64,
    pub delta_over_kappa: f64,
}

impl InfoSummary {
    pub fn new(info: &InfoQuantities) -> Self {
        let mut j = [[0.0; 3]; 3];
        for (i, row) in j.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = info.j_full[(i, k)];
            }
        }
        InfoSummary {
            point: info.point,
            j_full: j,
            kappa2: info.kappa2,
            kappa: info.kappa(),
            delta_hat: info.delta_hat,
            delta_over_kappa: info.delta_over_kappa(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusEntry {
    pub focus: String,
    pub geometry: FocusGeometry,
    pub mu_full: f64,
}

/// Everything `fit`/`select` produce. Contains no timestamp, so identical
/// inputs give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub software: Software,
    pub config: AnalysisConfig,
    pub input: InputSummary,
    pub fits: Fits,
    pub info: InfoSummary,
    /// In table order: AIC*, FIC_MAE per focus, pre-test, LRT.
    pub criteria: Vec<SelectionReport>,
    pub foci: Vec<FocusEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lrt: Option<LrtResult>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn criterion(&self, name: &str) -> Option<&SelectionReport> {
        self.criteria.iter().find(|c| c.criterion == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Fixed-width text table of the criterion values.
    pub fn table(&self) -> String {
        let mut out = format!("{:<28} {:>16} {:>16}  {}\n", "criterion", "Gompertz", "gamma-Gompertz", "chosen");
        for c in &self.criteria {
            out.push_str(&format!("{:<28} {:>16.6} {:>16.6}  {}\n", c.criterion, c.score_null, c.score_full, c.chosen.as_str()));
        }
        if let Some(t) = &self.lrt {
            out.push_str(&format!("LRT statistic {:.6}, p-value {:.6}\n", t.statistic, t.p_value));
        }
        out
    }
}

pub fn sample_digest(sample: &Sample) -> String {
    let mut h = Sha256::new();
    h.update(sample.truncation().to_le_bytes());
    for y in sample.lifespans() {
        h.update(y.to_le_bytes());
    }
    hex(&h.finalize())
}

/// Fits both models and evaluates every configured criterion and focus.
pub fn analyze(sample: &Sample, config: &AnalysisConfig) -> Result<ReportDocument> {
    config.validate()?;
    let scale = config.scale()?;
    if (sample.truncation() - scale.truncation_offset()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "sample truncation {} does not match truncation_age - origin_age = {}",
            sample.truncation(),
            scale.truncation_offset()
        )));
    }
    let fit_cfg = config.fit_config();
    let null = fit_null(sample, &fit_cfg)?;
    let full = fit_full_from_null(sample, &null, &fit_cfg)?;
    let info = info_quantities_at(config.info_point, sample, &null, &full)?;
    let (foci, warnings) = config.resolve_foci(sample)?;
    let wants = |c: Criterion| config.criteria.contains(&c);

    let mut criteria = Vec::new();
    if wants(Criterion::AicStar) {
        criteria.push(aic_star(&full, &null, &info)?);
    }
    let mut entries = Vec::new();
    if wants(Criterion::FicMae) {
        for focus in &foci {
            let label = focus.label(config.origin_age);
            let geometry = focus_geometry(focus, &null, &info)?;
            criteria.push(fic_mae(&geometry, &info, &label)?);
            entries.push(FocusEntry { focus: label, geometry, mu_full: focus.value(&full.params)? });
        }
    }
    if wants(Criterion::Pretest) {
        criteria.push(pretest(&info)?);
    }
    let test = lrt(&full, &null)?;
    let lrt_out = if wants(Criterion::Lrt) {
        criteria.push(test.report(config.lrt_alpha));
        Some(test)
    } else {
        None
    };

    let mut echo = config.clone();
    echo.foci = foci.iter().map(|f| f.label(config.origin_age)).collect();
    let (min_y, max_y) = sample
        .lifespans()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    Ok(ReportDocument {
        schema_version: REPORT_SCHEMA_VERSION,
        software: Software::default(),
        config: echo,
        input: InputSummary {
            n: sample.n(),
            origin_age: config.origin_age,
            truncation_age: config.truncation_age,
            min_age: scale.to_age(min_y),
            max_age: scale.to_age(max_y),
            sample_sha256: sample_digest(sample),
            file_sha256: None,
            rejected_rows: 0,
        },
        fits: Fits { null: FitSummary::new(&null), full: FitSummary::new(&full) },
        info: InfoSummary::new(&info),
        criteria,
        foci: entries,
        lrt: lrt_out,
        warnings,
    })
}
