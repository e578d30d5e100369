use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::csv_err;
use crate::error::Result;
use crate::sim::{OracleRow, ScenarioMetrics, METRICS_SCHEMA_VERSION};

/// Writes via a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Contents of `metrics.json`: one entry per simulated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub schema_version: u32,
    pub runs: Vec<ScenarioMetrics>,
}

impl MetricsDocument {
    pub fn new(runs: Vec<ScenarioMetrics>) -> Self {
        MetricsDocument { schema_version: METRICS_SCHEMA_VERSION, runs }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub const ORACLE_HEADER: [&str; 13] = [
    "tau0",
    "omega",
    "delta",
    "kappa",
    "mae_null_closed",
    "mae_null_mc",
    "mae_full_closed",
    "mae_full_mc",
    "mse_null_closed",
    "mse_null_mc",
    "mse_full_closed",
    "mse_full_mc",
    "max_relative_gap",
];

pub fn write_oracle_csv<W: Write>(writer: W, rows: &[OracleRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ORACLE_HEADER).map_err(csv_err)?;
    for r in rows {
        let g = r.geometry;
        let fields = [
            g.tau0,
            g.omega,
            g.delta,
            g.kappa,
            r.mae_null_closed,
            r.mae_null_mc,
            r.mae_full_closed,
            r.mae_full_mc,
            r.mse_null_closed,
            r.mse_null_mc,
            r.mse_full_closed,
            r.mse_full_mc,
            r.max_relative_gap,
        ];
        w.write_record(fields.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
