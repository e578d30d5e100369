//! Seeded Monte Carlo studies of the selection rules.
//!
//! A scenario fixes true parameters, a cohort size at the origin age, and an
//! age window. Each replication draws a cohort, keeps the people who survive
//! into the window, fits both models and records every criterion's decision
//! and the focus estimates each decision implies. Replication `r` always uses
//! ChaCha stream `r` of the master seed, so results do not depend on thread
//! count or scheduling.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{fit_full_from_null, fit_null, info_quantities_at, FitConfig, InfoPoint, Model, Sample};
use crate::model::ModelParams;
use crate::selection::{
    aic_star, fic_mae, focus_geometry, lrt, mae_risks, mse_risks, pretest, FocusSpec, LrtResult, LRT_ALPHA,
};

pub const METRICS_SCHEMA_VERSION: u32 = 1;

/// Share of failed replications above which a run is rejected.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub params: ModelParams,
    /// Expected number of people alive at the calibration age.
    pub target_n: usize,
    /// Only people who survive to this age enter a replication's sample.
    pub window_age: f64,
    /// Age at which `target_n` is met; defaults to `window_age`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_age: Option<f64>,
    pub origin_age: f64,
    pub replications: usize,
    pub master_seed: u64,
}

impl Scenario {
    /// The three reference parameter sets: `S1` (σ² = 0.0625), `S2`
    /// (σ² = 0.03) and the pure Gompertz `S3`.
    pub fn preset_params(name: &str) -> Result<ModelParams> {
        match name {
            "S1" => ModelParams::new(0.013, 0.092, 0.0625),
            "S2" => ModelParams::new(0.013, 0.092, 0.03),
            "S3" => ModelParams::new(0.0198, 0.0726, 0.0),
            other => Err(Error::Scenario(format!("unknown preset `{other}` (expected S1, S2 or S3)"))),
        }
    }

    /// A preset with the 90+ window on the age-60 origin.
    pub fn preset(name: &str, target_n: usize, replications: usize, master_seed: u64) -> Result<Self> {
        Ok(Scenario {
            name: name.to_string(),
            params: Self::preset_params(name)?,
            target_n,
            window_age: 90.0,
            calibration_age: None,
            origin_age: 60.0,
            replications,
            master_seed,
        })
    }

    pub fn with_window(mut self, window_age: f64) -> Self {
        self.window_age = window_age;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_n == 0 {
            return Err(Error::Scenario("target_n must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::Scenario("replications must be positive".into()));
        }
        let cal = self.calibration_age();
        for (name, age) in [("window_age", self.window_age), ("calibration_age", cal)] {
            if !(age.is_finite() && age >= self.origin_age) {
                return Err(Error::Scenario(format!("{name} {age} must be >= origin_age {}", self.origin_age)));
            }
        }
        Ok(())
    }

    pub fn calibration_age(&self) -> f64 {
        self.calibration_age.unwrap_or(self.window_age)
    }

    pub fn window_offset(&self) -> f64 {
        self.window_age - self.origin_age
    }
}

/// Cohort size at the origin so that `target_n` people are expected alive at
/// the calibration age.
pub fn calibrate_cohort(scenario: &Scenario) -> Result<usize> {
    scenario.validate()?;
    let s = scenario.params.survival(scenario.calibration_age() - scenario.origin_age)?;
    if s <= 0.0 {
        return Err(Error::Scenario("survival to the calibration age underflows".into()));
    }
    Ok((scenario.target_n as f64 / s).round() as usize)
}

/// Draws the cohort for replication `rep_id` and keeps those who reach the window.
pub fn generate_replication(scenario: &Scenario, rep_id: u64) -> Result<Sample> {
    let n0 = calibrate_cohort(scenario)?;
    let w = scenario.window_offset();
    let s_w = scenario.params.survival(w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.master_seed);
    rng.set_stream(rep_id);
    let mut kept = Vec::with_capacity(((n0 as f64) * s_w * 1.1) as usize + 16);
    for _ in 0..n0 {
        // v is the individual's survival level; Y = S⁻¹(v) exceeds w iff v < S(w)
        let v: f64 = rng.sample(Open01);
        if v < s_w {
            let y = scenario.params.inverse_survival(v)?;
            if y > w {
                kept.push(y);
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::Scenario(format!("replication {rep_id}: nobody reached age {}", scenario.window_age)));
    }
    Sample::new(kept, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    FicMae,
    Pretest,
    AicStar,
    Lrt,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::FicMae, Criterion::Pretest, Criterion::AicStar, Criterion::Lrt];

    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::FicMae => "fic_mae",
            Criterion::Pretest => "pretest",
            Criterion::AicStar => "aic_star",
            Criterion::Lrt => "lrt",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str() == text.trim())
            .ok_or_else(|| Error::Config(format!("unknown criterion `{text}` (expected fic_mae, pretest, aic_star, lrt)")))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub criteria: Vec<Criterion>,
    pub foci: Vec<FocusSpec>,
    pub fit: FitConfig,
    pub lrt_alpha: f64,
    pub info_point: InfoPoint,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            criteria: Criterion::ALL.to_vec(),
            foci: vec![FocusSpec::LogHazardCurvature(40.0), FocusSpec::Sigma2],
            fit: FitConfig::default(),
            lrt_alpha: LRT_ALPHA,
            info_point: InfoPoint::FullMle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: String,
    pub chosen: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedEstimate {
    pub criterion: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusOutcome {
    pub focus: String,
    pub mu_null: f64,
    pub mu_full: f64,
    pub fic_score_null: f64,
    pub fic_score_full: f64,
    /// Estimate implied by each criterion's decision for this focus.
    pub selected: Vec<SelectedEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub rep_id: u64,
    pub n: usize,
    pub loglik_null: f64,
    pub loglik_full: f64,
    pub sigma2_hat: f64,
    pub boundary_hit: bool,
    pub delta_over_kappa: f64,
    pub lrt: LrtResult,
    pub decisions: Vec<Decision>,
    pub foci: Vec<FocusOutcome>,
}

impl ReplicationResult {
    pub fn decision(&self, label: &str) -> Option<Model> {
        self.decisions.iter().find(|d| d.label == label).map(|d| d.chosen)
    }
}

fn fic_label(focus: &FocusSpec, origin_age: f64) -> String {
    format!("fic_mae[{}]", focus.label(origin_age))
}

/// Fits and selects on one sample.
pub fn analyze_replication(sample: &Sample, rep_id: u64, origin_age: f64, opts: &RunOptions) -> Result<ReplicationResult> {
    let null = fit_null(sample, &opts.fit)?;
    let full = fit_full_from_null(sample, &null, &opts.fit)?;
    let info = info_quantities_at(opts.info_point, sample, &null, &full)?;
    let test = lrt(&full, &null)?;
    let wants = |c: Criterion| opts.criteria.contains(&c);

    let mut decisions = Vec::new();
    let mut shared: Vec<(&'static str, Model)> = Vec::new();
    if wants(Criterion::Pretest) {
        shared.push(("pretest", pretest(&info)?.chosen));
    }
    if wants(Criterion::AicStar) {
        shared.push(("aic_star", aic_star(&full, &null, &info)?.chosen));
    }
    if wants(Criterion::Lrt) {
        shared.push(("lrt", test.chosen(opts.lrt_alpha)));
    }

    let mut foci = Vec::with_capacity(opts.foci.len());
    for focus in &opts.foci {
        let geometry = focus_geometry(focus, &null, &info)?;
        let mu_null = geometry.mu_null;
        let mu_full = focus.value(&full.params)?;
        let pick = |m: Model| if m == Model::Full { mu_full } else { mu_null };
        let mut selected = Vec::new();
        let (mut score_null, mut score_full) = (f64::NAN, f64::NAN);
        if wants(Criterion::FicMae) {
            let rep = fic_mae(&geometry, &info, &focus.label(origin_age))?;
            score_null = rep.score_null;
            score_full = rep.score_full;
            decisions.push(Decision { label: fic_label(focus, origin_age), chosen: rep.chosen });
            selected.push(SelectedEstimate { criterion: "fic_mae".into(), value: pick(rep.chosen) });
        }
        for &(label, chosen) in &shared {
            selected.push(SelectedEstimate { criterion: label.into(), value: pick(chosen) });
        }
        foci.push(FocusOutcome {
            focus: focus.label(origin_age),
            mu_null,
            mu_full,
            fic_score_null: score_null,
            fic_score_full: score_full,
            selected,
        });
    }
    decisions.extend(shared.iter().map(|&(label, chosen)| Decision { label: label.into(), chosen }));

    Ok(ReplicationResult {
        rep_id,
        n: sample.n(),
        loglik_null: null.loglik,
        loglik_full: full.loglik,
        sigma2_hat: full.params.sigma2(),
        boundary_hit: full.boundary_hit,
        delta_over_kappa: info.delta_over_kappa(),
        lrt: test,
        decisions,
        foci,
    })
}

pub fn run_replication(scenario: &Scenario, rep_id: u64, opts: &RunOptions) -> Result<ReplicationResult> {
    let sample = generate_replication(scenario, rep_id)?;
    analyze_replication(&sample, rep_id, scenario.origin_age, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub rep_id: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionMetric {
    pub label: String,
    pub count_full: usize,
    pub proportion_full: f64,
    /// `√(p(1−p)/R)`.
    pub mc_standard_error: f64,
}

/// Mean absolute error of an estimator over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaeMetric {
    pub estimator: String,
    pub mae: f64,
    pub mc_standard_error: f64,
    /// Mean of `√n·|μ̂ − μ|`, on the scale of the FIC scores.
    pub scaled_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusMetrics {
    pub focus: String,
    pub mu_true: f64,
    pub mean_fic_score_null: f64,
    pub mean_fic_score_full: f64,
    /// Entries `null`, `full` and one per criterion (`selected:<criterion>`).
    pub mae: Vec<MaeMetric>,
}

impl FocusMetrics {
    pub fn mae_of(&self, estimator: &str) -> Option<&MaeMetric> {
        self.mae.iter().find(|m| m.estimator == estimator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub cohort_size: usize,
    pub replications_ok: usize,
    pub failures: Vec<Failure>,
    pub mean_sample_size: f64,
    pub mean_delta_over_kappa: f64,
    pub boundary_fraction: f64,
    pub lrt_zero_fraction: f64,
    pub lrt_alpha: f64,
    pub lrt_rejection_rate: f64,
    pub decisions: Vec<DecisionMetric>,
    pub foci: Vec<FocusMetrics>,
}

impl ScenarioMetrics {
    pub fn decision(&self, label: &str) -> Option<&DecisionMetric> {
        self.decisions.iter().find(|d| d.label == label)
    }

    pub fn focus(&self, label: &str) -> Option<&FocusMetrics> {
        self.foci.iter().find(|f| f.focus == label)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub metrics: ScenarioMetrics,
    pub replications: Vec<ReplicationResult>,
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let m = v.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
    } else {
        f64::NAN
    };
    (m, se, n)
}

/// Runs all replications (in parallel on the current rayon pool) and
/// aggregates them in replication order.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<ScenarioOutcome> {
    scenario.validate()?;
    let cohort_size = calibrate_cohort(scenario)?;
    for f in &opts.foci {
        f.validate()?;
    }
    let results: Vec<Result<ReplicationResult>> = (0..scenario.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(scenario, r, opts))
        .collect();

    let mut ok = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(rep) => ok.push(rep),
            Err(e) => failures.push(Failure { rep_id: r as u64, error: e.to_string() }),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_RATE * scenario.replications as f64 {
        return Err(Error::Scenario(format!(
            "{} of {} replications failed (first: rep {}: {})",
            failures.len(),
            scenario.replications,
            failures[0].rep_id,
            failures[0].error
        )));
    }
    let metrics = aggregate(scenario, cohort_size, &ok, failures, opts)?;
    Ok(ScenarioOutcome { metrics, replications: ok })
}

fn aggregate(
    scenario: &Scenario,
    cohort_size: usize,
    reps: &[ReplicationResult],
    failures: Vec<Failure>,
    opts: &RunOptions,
) -> Result<ScenarioMetrics> {
    let r = reps.len();
    if r == 0 {
        return Err(Error::Scenario("no replication succeeded".into()));
    }
    let rf = r as f64;
    let frac = |pred: &dyn Fn(&ReplicationResult) -> bool| reps.iter().filter(|x| pred(x)).count() as f64 / rf;

    let labels: Vec<String> = reps[0].decisions.iter().map(|d| d.label.clone()).collect();
    let decisions = labels
        .iter()
        .map(|label| {
            let count_full = reps.iter().filter(|x| x.decision(label) == Some(Model::Full)).count();
            let p = count_full as f64 / rf;
            DecisionMetric {
                label: label.clone(),
                count_full,
                proportion_full: p,
                mc_standard_error: (p * (1.0 - p) / rf).sqrt(),
            }
        })
        .collect();

    let mut foci = Vec::new();
    for (k, focus) in opts.foci.iter().enumerate() {
        let mu_true = focus.value(&scenario.params)?;
        fn outcome(x: &ReplicationResult, k: usize) -> &FocusOutcome {
            &x.foci[k]
        }
        let mae_metric = |name: String, est: &dyn Fn(&ReplicationResult) -> f64| {
            let (mae, se, _) = mean(reps.iter().map(|x| (est(x) - mu_true).abs()));
            let (scaled, _, _) = mean(reps.iter().map(|x| (x.n as f64).sqrt() * (est(x) - mu_true).abs()));
            MaeMetric { estimator: name, mae, mc_standard_error: se, scaled_mae: scaled }
        };
        let mut mae = vec![
            mae_metric("null".into(), &|x| outcome(x, k).mu_null),
            mae_metric("full".into(), &|x| outcome(x, k).mu_full),
        ];
        for (j, sel) in reps[0].foci[k].selected.iter().enumerate() {
            mae.push(mae_metric(format!("selected:{}", sel.criterion), &|x| outcome(x, k).selected[j].value));
        }
        foci.push(FocusMetrics {
            focus: focus.label(scenario.origin_age),
            mu_true,
            mean_fic_score_null: mean(reps.iter().map(|x| outcome(x, k).fic_score_null)).0,
            mean_fic_score_full: mean(reps.iter().map(|x| outcome(x, k).fic_score_full)).0,
            mae,
        });
    }

    Ok(ScenarioMetrics {
        schema_version: METRICS_SCHEMA_VERSION,
        scenario: scenario.clone(),
        cohort_size,
        replications_ok: r,
        failures,
        mean_sample_size: mean(reps.iter().map(|x| x.n as f64)).0,
        mean_delta_over_kappa: mean(reps.iter().map(|x| x.delta_over_kappa)).0,
        boundary_fraction: frac(&|x| x.boundary_hit),
        lrt_zero_fraction: frac(&|x| x.lrt.statistic == 0.0),
        lrt_alpha: opts.lrt_alpha,
        lrt_rejection_rate: frac(&|x| x.lrt.p_value < opts.lrt_alpha),
        decisions,
        foci,
    })
}

/// Asymptotic geometry `(τ₀, ω, δ, κ)` of one focus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGeometry {
    pub tau0: f64,
    pub omega: f64,
    pub delta: f64,
    pub kappa: f64,
}

/// Uniform random geometries: `τ₀ ∈ [0.1, 2]`, `ω ∈ [−2, 2]`, `δ ∈ [0, 3]`, `κ ∈ [0.2, 2]`.
pub fn random_geometries(count: usize, seed: u64) -> Vec<OracleGeometry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| OracleGeometry {
            tau0: rng.random_range(0.1..2.0),
            omega: rng.random_range(-2.0..2.0),
            delta: rng.random_range(0.0..3.0),
            kappa: rng.random_range(0.2..2.0),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub geometry: OracleGeometry,
    pub mae_null_closed: f64,
    pub mae_null_mc: f64,
    pub mae_full_closed: f64,
    pub mae_full_mc: f64,
    pub mse_null_closed: f64,
    pub mse_null_mc: f64,
    pub mse_full_closed: f64,
    pub mse_full_mc: f64,
    pub max_relative_gap: f64,
}

/// Simulates `Λ₀ ~ N(0, τ₀²)` and `D ~ N(δ, κ²)` independently, forms
/// `Λ_null = Λ₀ + ωδ` and `Λ_full = Λ₀ + ω(δ − D)` if `D > 0`, else `Λ_null`,
/// and compares their mean absolute and squared values with the closed forms.
pub fn mae_oracle_study(geometries: &[OracleGeometry], draws: usize, seed: u64) -> Result<Vec<OracleRow>> {
    if draws < 100_000 {
        return Err(Error::InvalidArgument(format!("oracle needs at least 1e5 draws, got {draws}")));
    }
    geometries
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let (mae_null_closed, mae_full_closed) = mae_risks(g.tau0, g.omega, g.delta, g.kappa)?;
            let (mse_null_closed, mse_full_closed) = mse_risks(g.tau0, g.omega, g.delta, g.kappa)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (mut an, mut af, mut sn, mut sf) = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..draws {
                let z0: f64 = rng.sample(StandardNormal);
                let z1: f64 = rng.sample(StandardNormal);
                let l0 = g.tau0 * z0;
                let d = g.delta + g.kappa * z1;
                let ln = l0 + g.omega * g.delta;
                let lf = if d > 0.0 { l0 + g.omega * (g.delta - d) } else { ln };
                an += ln.abs();
                af += lf.abs();
                sn += ln * ln;
                sf += lf * lf;
            }
            let m = draws as f64;
            let (an, af, sn, sf) = (an / m, af / m, sn / m, sf / m);
            let gap = |closed: f64, mc: f64| (closed - mc).abs() / closed.abs().max(f64::MIN_POSITIVE);
            let max_relative_gap = gap(mae_null_closed, an)
                .max(gap(mae_full_closed, af))
                .max(gap(mse_null_closed, sn))
                .max(gap(mse_full_closed, sf));
            Ok(OracleRow {
                geometry: *g,
                mae_null_closed,
                mae_null_mc: an,
                mae_full_closed,
                mae_full_mc: af,
                mse_null_closed,
                mse_null_mc: sn,
                mse_full_closed,
                mse_full_mc: sf,
                max_relative_gap,
            })
        })
        .collect()
}
