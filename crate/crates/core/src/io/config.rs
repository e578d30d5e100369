use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{FitConfig, InfoPoint, Sample};
use crate::model::{AgeScale, ModelParams};
use crate::selection::{FocusSpec, LRT_ALPHA};
use crate::sim::{Criterion, RunOptions, Scenario};

fn default_origin() -> f64 {
    60.0
}
fn default_truncation() -> f64 {
    90.0
}
fn default_criteria() -> Vec<Criterion> {
    Criterion::ALL.to_vec()
}
fn default_starts() -> Vec<f64> {
    FitConfig::default().sigma2_starts
}
fn default_alpha() -> f64 {
    LRT_ALPHA
}

/// Quantile of the observed ages used for the default curvature focus.
pub const DEFAULT_FOCUS_QUANTILE: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_origin")]
    pub origin_age: f64,
    #[serde(default = "default_truncation")]
    pub truncation_age: f64,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
    /// Focus labels (`sigma2`, `curvature@100`, ...). Empty means `sigma2`
    /// plus the curvature at the 99th-percentile observed age.
    #[serde(default)]
    pub foci: Vec<String>,
    #[serde(default = "default_starts")]
    pub sigma2_starts: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub lrt_alpha: f64,
    #[serde(default)]
    pub info_point: InfoPoint,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            origin_age: default_origin(),
            truncation_age: default_truncation(),
            criteria: default_criteria(),
            foci: Vec::new(),
            sigma2_starts: default_starts(),
            seed: 0,
            lrt_alpha: default_alpha(),
            info_point: InfoPoint::FullMle,
        }
    }
}

impl AnalysisConfig {
    pub fn scale(&self) -> Result<AgeScale> {
        AgeScale::new(self.origin_age, self.truncation_age).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig { sigma2_starts: self.sigma2_starts.clone(), ..FitConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.scale()?;
        if self.criteria.is_empty() {
            return Err(Error::Config("at least one criterion is required".into()));
        }
        if self.sigma2_starts.is_empty() || self.sigma2_starts.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config("sigma2_starts must be a non-empty list of positive numbers".into()));
        }
        if !(self.lrt_alpha > 0.0 && self.lrt_alpha < 1.0) {
            return Err(Error::Config(format!("lrt_alpha must lie in (0, 1), got {}", self.lrt_alpha)));
        }
        for f in &self.foci {
            FocusSpec::parse(f, self.origin_age)?;
        }
        Ok(())
    }

    /// Parsed foci (defaults filled in from `sample`) and warnings for focus
    /// ages outside `[origin, max observed + 10]`.
    pub fn resolve_foci(&self, sample: &Sample) -> Result<(Vec<FocusSpec>, Vec<String>)> {
        let foci = if self.foci.is_empty() {
            let y = (sample.quantile(DEFAULT_FOCUS_QUANTILE) * 10.0).round() / 10.0;
            vec![FocusSpec::Sigma2, FocusSpec::LogHazardCurvature(y)]
        } else {
            self.foci.iter().map(|f| FocusSpec::parse(f, self.origin_age)).collect::<Result<_>>()?
        };
        let max_y = sample.lifespans().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let warnings = foci
            .iter()
            .filter_map(|f| {
                let y = f.age_offset()?;
                (y > max_y + 10.0).then(|| {
                    format!(
                        "focus {} lies more than 10 years beyond the oldest observed age {:.2}",
                        f.label(self.origin_age),
                        max_y + self.origin_age
                    )
                })
            })
            .collect();
        Ok((foci, warnings))
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let cfg: AnalysisConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Scenario description as written in a TOML file. Unknown keys are errors.
///
/// ```toml
/// name = "S1"            # a preset, or any name when a, b, sigma2 are given
/// target_n = 10000
/// window_age = 90
/// replications = 200
/// master_seed = 42
/// foci = ["curvature@100", "sigma2"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub sigma2: Option<f64>,
    pub target_n: usize,
    #[serde(default = "default_truncation")]
    pub window_age: f64,
    #[serde(default)]
    pub calibration_age: Option<f64>,
    #[serde(default = "default_origin")]
    pub origin_age: f64,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<Criterion>,
    #[serde(default = "default_sim_foci")]
    pub foci: Vec<String>,
    #[serde(default = "default_starts")]
    pub sigma2_starts: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub lrt_alpha: f64,
}

fn default_sim_foci() -> Vec<String> {
    vec!["curvature@100".into(), "sigma2".into()]
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path.as_ref())?)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let params = match (self.a, self.b, self.sigma2) {
            (Some(a), Some(b), Some(s)) => ModelParams::new(a, b, s).map_err(|e| Error::Config(e.to_string()))?,
            (None, None, None) => Scenario::preset_params(&self.name)
                .map_err(|_| Error::Config(format!("`{}` is not a preset; give a, b and sigma2", self.name)))?,
            _ => return Err(Error::Config("a, b and sigma2 must be given together".into())),
        };
        let sc = Scenario {
            name: self.name.clone(),
            params,
            target_n: self.target_n,
            window_age: self.window_age,
            calibration_age: self.calibration_age,
            origin_age: self.origin_age,
            replications: self.replications,
            master_seed: self.master_seed,
        };
        sc.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(sc)
    }

    pub fn run_options(&self) -> Result<RunOptions> {
        if !(self.lrt_alpha > 0.0 && self.lrt_alpha < 1.0) {
            return Err(Error::Config(format!("lrt_alpha must lie in (0, 1), got {}", self.lrt_alpha)));
        }
        Ok(RunOptions {
            criteria: self.criteria.clone(),
            foci: self.foci.iter().map(|f| FocusSpec::parse(f, self.origin_age)).collect::<Result<_>>()?,
            fit: FitConfig { sigma2_starts: self.sigma2_starts.clone(), ..FitConfig::default() },
            lrt_alpha: self.lrt_alpha,
            info_point: InfoPoint::FullMle,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_file_presets_and_unknown_keys() {
        let f = ScenarioFile::parse("name = \"S2\"\ntarget_n = 500\nreplications = 3\nmaster_seed = 1\n").unwrap();
        let sc = f.scenario().unwrap();
        assert_eq!(sc.params.sigma2(), 0.03);
        assert_eq!(sc.window_age, 90.0);
        assert_eq!(f.run_options().unwrap().foci.len(), 2);
        assert!(ScenarioFile::parse("name = \"S2\"\ntarget_n = 5\nreplications = 3\nmaster_seed = 1\ncolour = 2\n").is_err());
        let custom = ScenarioFile::parse("name = \"mine\"\ntarget_n = 5\nreplications = 3\nmaster_seed = 1\n").unwrap();
        assert!(custom.scenario().is_err());
        let custom = ScenarioFile::parse(
            "name = \"mine\"\na = 0.01\nb = 0.1\nsigma2 = 0.02\ntarget_n = 5\nreplications = 3\nmaster_seed = 1\n",
        )
        .unwrap();
        assert_eq!(custom.scenario().unwrap().params.b(), 0.1);
    }

    #[test]
    fn analysis_config_defaults_and_validation() {
        let cfg: AnalysisConfig = toml::from_str("truncation_age = 85\n").unwrap();
        assert_eq!(cfg.origin_age, 60.0);
        assert_eq!(cfg.criteria.len(), 4);
        assert!(toml::from_str::<AnalysisConfig>("bogus = 1\n").is_err());
        let bad = AnalysisConfig { truncation_age: 50.0, ..AnalysisConfig::default() };
        assert!(bad.validate().is_err());
        let bad = AnalysisConfig { foci: vec!["wiggle@3".into()], ..AnalysisConfig::default() };
        assert!(bad.validate().is_err());
    }
}
