//! File formats and orchestration: `id,age_at_death` CSV input, TOML
//! configs, `report.json`, `rates.csv`, `metrics.json` and `oracle.csv`.

mod config;
mod dataset;
mod files;
mod rates;
mod report;

pub use config::{AnalysisConfig, ScenarioFile, DEFAULT_FOCUS_QUANTILE};
pub use dataset::{ingest, ingest_reader, write_dataset, Ingested, RejectedRow};
pub use files::{write_atomic, write_oracle_csv, MetricsDocument, ORACLE_HEADER};
pub use rates::{rate_table, write_rates_csv, RateRow, RATES_HEADER};
pub use report::{
    analyze, sample_digest, FitSummary, Fits, FocusEntry, InfoSummary, InputSummary, ReportDocument, Software,
    REPORT_SCHEMA_VERSION,
};
