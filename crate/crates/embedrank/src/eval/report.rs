//! Evaluation report assembly and export (JSON + CSV).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Provenance of a measurement: which method produced the space that was
/// evaluated, and under which knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub method: String,
    pub dim: usize,
    pub metric: String,
    pub seed: u64,
    pub folds: usize,
}

/// Metrics of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ReportConfig,
    pub map: f64,
    pub mrr: f64,
    pub pr_curve: Vec<(f64, f64)>,
    pub per_query_ap: Vec<f64>,
    pub timing_s: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).expect("report serialization cannot fail"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| crate::error::Error::Format(format!("bad report JSON: {e}")))
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        w.write_all(self.to_json()?.as_bytes())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn csv_row(&self) -> String {
        let time = match self.timing_s {
            Some(t) => format!("{t:.9}"),
            None => String::new(),
        };
        format!(
            "{},{},{:.6},{:.6},{}",
            self.config.method, self.config.dim, self.map, self.mrr, time
        )
    }
}

/// Writes reports as `method,dim,map,mrr,time_s` CSV, one row per report.
pub fn write_reports_csv(reports: &[EvalReport], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "method,dim,map,mrr,time_s")?;
    for report in reports {
        writeln!(w, "{}", report.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
