use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ggfic::io::{
    analyze, ingest, rate_table, write_atomic, write_oracle_csv, write_rates_csv, AnalysisConfig, Ingested,
    MetricsDocument, ScenarioFile,
};
use ggfic::inference::{fit_full_from_null, fit_null};
use ggfic::sim::{mae_oracle_study, random_geometries, run_scenario, Criterion, RunOptions, Scenario};
use ggfic::Error;

#[derive(Parser)]
#[command(name = "ggfic", version, about = "Gompertz vs gamma-Gompertz fitting and model selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit both models and write report.json (LRT only unless --criteria is given).
    Fit(DataArgs),
    /// Fit both models, evaluate all criteria and write report.json.
    Select(DataArgs),
    /// Write single-year death rates with fitted hazards to rates.csv.
    Rates(DataArgs),
    /// Run a Monte Carlo scenario and write metrics.json.
    Simulate(SimArgs),
    /// Check the closed-form risks against simulation and write oracle.csv.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV with header `id,age_at_death`.
    #[arg(long)]
    data: PathBuf,
    /// TOML analysis config; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    origin_age: Option<f64>,
    /// Truncation age in calendar years.
    #[arg(long)]
    truncation: Option<f64>,
    /// sigma2 | curvature@AGE | loghaz@AGE | survival@AGE (repeatable).
    #[arg(long)]
    focus: Vec<String>,
    /// Comma-separated subset of fic_mae,pretest,aic_star,lrt.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    S1,
    S2,
    S3,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::S1 => "S1",
            Preset::S2 => "S2",
            Preset::S3 => "S3",
        }
    }
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum, default_value = "s1", ignore_case = true)]
    scenario: Preset,
    /// TOML scenario file; replaces --scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Expected sample size at the window age (default: 10000 and 20000).
    #[arg(long)]
    target_n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["80", "85", "90"])]
    window: Option<String>,
    #[arg(long)]
    focus: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<String>,
    /// 1000 replications at targets 10000, 20000 and 105000.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[arg(long, default_value_t = 50)]
    geometries: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> ggfic::Result<()> {
    match cli.command {
        Command::Fit(args) => data_command(args, Mode::Fit),
        Command::Select(args) => data_command(args, Mode::Select),
        Command::Rates(args) => data_command(args, Mode::Rates),
        Command::Simulate(args) => simulate(args),
        Command::Oracle(args) => oracle(args),
    }
}

#[derive(PartialEq)]
enum Mode {
    Fit,
    Select,
    Rates,
}

fn parse_criteria(list: &[String]) -> ggfic::Result<Vec<Criterion>> {
    list.iter().filter(|s| !s.trim().is_empty()).map(|s| Criterion::parse(s)).collect()
}

fn analysis_config(args: &DataArgs, mode: &Mode) -> ggfic::Result<AnalysisConfig> {
    let mut cfg = match &args.config {
        Some(path) => AnalysisConfig::from_toml_file(path)?,
        None => AnalysisConfig::default(),
    };
    if *mode == Mode::Fit && args.config.is_none() {
        cfg.criteria = vec![Criterion::Lrt];
    }
    if let Some(o) = args.origin_age {
        cfg.origin_age = o;
    }
    if let Some(t) = args.truncation {
        cfg.truncation_age = t;
    }
    if !args.focus.is_empty() {
        cfg.foci = args.focus.clone();
    }
    if !args.criteria.is_empty() {
        cfg.criteria = parse_criteria(&args.criteria)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report_rejected(data: &Ingested, truncation_age: f64) {
    if data.rejected.is_empty() {
        return;
    }
    eprintln!("{} row(s) at or below the truncation age {truncation_age} were left out:", data.rejected.len());
    for r in data.rejected.iter().take(20) {
        eprintln!("  line {}: id {} age {}", r.line, r.id, r.age_at_death);
    }
    if data.rejected.len() > 20 {
        eprintln!("  ... and {} more", data.rejected.len() - 20);
    }
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

fn data_command(args: DataArgs, mode: Mode) -> ggfic::Result<()> {
    let cfg = analysis_config(&args, &mode)?;
    let scale = cfg.scale()?;
    let data = ingest(&args.data, &scale)?;
    report_rejected(&data, cfg.truncation_age);

    if mode == Mode::Rates {
        let fit_cfg = cfg.fit_config();
        let null = fit_null(&data.sample, &fit_cfg)?;
        let full = fit_full_from_null(&data.sample, &null, &fit_cfg)?;
        let rows = rate_table(&data.sample, &null, &full, &scale)?;
        let mut buf = Vec::new();
        write_rates_csv(&mut buf, &rows)?;
        let path = args.out.join("rates.csv");
        write_atomic(&path, &buf)?;
        written(&path);
        return Ok(());
    }

    let mut report = analyze(&data.sample, &cfg)?;
    report.input.file_sha256 = Some(data.file_sha256.clone());
    report.input.rejected_rows = data.rejected.len();
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let path = args.out.join("report.json");
    write_atomic(&path, report.to_json()?.as_bytes())?;
    let (nf, ff) = (&report.fits.null, &report.fits.full);
    println!("n = {}", report.input.n);
    println!("Gompertz:       a = {:.6e}, b = {:.6}, loglik = {:.4}", nf.a, nf.b, nf.loglik);
    println!(
        "gamma-Gompertz: a = {:.6e}, b = {:.6}, sigma2 = {:.6}, loglik = {:.4}{}",
        ff.a,
        ff.b,
        ff.sigma2,
        ff.loglik,
        if ff.boundary_hit { " (boundary)" } else { "" }
    );
    if mode == Mode::Select {
        print!("{}", report.table());
    } else if let Some(t) = &report.lrt {
        println!("LRT statistic {:.6}, p-value {:.6}", t.statistic, t.p_value);
    }
    written(&path);
    Ok(())
}

fn init_threads(threads: Option<usize>) -> ggfic::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn simulate(args: SimArgs) -> ggfic::Result<()> {
    init_threads(args.threads)?;
    let (base, mut opts) = match &args.config {
        Some(path) => {
            let file = ScenarioFile::from_file(path)?;
            (file.scenario()?, file.run_options()?)
        }
        None => (Scenario::preset(args.scenario.name(), 10_000, 200, 0)?, RunOptions::default()),
    };
    if !args.focus.is_empty() {
        opts.foci = args
            .focus
            .iter()
            .map(|f| ggfic::FocusSpec::parse(f, base.origin_age))
            .collect::<ggfic::Result<_>>()?;
    }
    if !args.criteria.is_empty() {
        opts.criteria = parse_criteria(&args.criteria)?;
    }

    let mut targets = match (args.target_n, &args.config) {
        (Some(n), _) => vec![n],
        (None, Some(_)) => vec![base.target_n],
        (None, None) => vec![10_000, 20_000],
    };
    let mut reps = args.reps.unwrap_or(base.replications);
    if args.paper_scale {
        eprintln!("warning: --paper-scale runs 1000 replications per target including n = 105000; expect hours on one core");
        reps = args.reps.unwrap_or(1000);
        if args.target_n.is_none() {
            targets = vec![10_000, 20_000, 105_000];
        }
    }

    let mut runs = Vec::new();
    for target in targets {
        let mut sc = base.clone();
        sc.target_n = target;
        sc.replications = reps;
        if let Some(seed) = args.seed {
            sc.master_seed = seed;
        }
        if let Some(w) = &args.window {
            sc.window_age = w.parse().expect("validated by clap");
        }
        eprintln!("running {} target {} window {}+ with {} replications", sc.name, sc.target_n, sc.window_age, sc.replications);
        let outcome = run_scenario(&sc, &opts)?;
        for d in &outcome.metrics.decisions {
            println!(
                "{} n={} {:<28} proportion_full {:.4} (se {:.4})",
                sc.name, sc.target_n, d.label, d.proportion_full, d.mc_standard_error
            );
        }
        if !outcome.metrics.failures.is_empty() {
            eprintln!("warning: {} replication(s) failed and were excluded", outcome.metrics.failures.len());
        }
        runs.push(outcome.metrics);
    }
    let path = args.out.join("metrics.json");
    write_atomic(&path, MetricsDocument::new(runs).to_json()?.as_bytes())?;
    written(&path);
    Ok(())
}

fn oracle(args: OracleArgs) -> ggfic::Result<()> {
    init_threads(args.threads)?;
    let geometries = random_geometries(args.geometries, args.seed);
    let rows = mae_oracle_study(&geometries, args.draws, args.seed)?;
    let mut buf = Vec::new();
    write_oracle_csv(&mut buf, &rows)?;
    let path = args.out.join("oracle.csv");
    write_atomic(&path, &buf)?;
    let worst = rows.iter().map(|r| r.max_relative_gap).fold(0.0, f64::max);
    println!("{} geometries, {} draws each: max relative gap {:.5}", rows.len(), args.draws, worst);
    written(&path);
    Ok(())
}
