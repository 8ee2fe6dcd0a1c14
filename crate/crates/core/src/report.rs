//! Experiment reports: one JSON document plus a companion CSV with one row
//! per cell. CSV column order is fixed per row type.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Flat record written as one CSV line.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<C, R, A> {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    /// Seconds since the Unix epoch; omitted in deterministic mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub config: C,
    pub rows: Vec<R>,
    pub aggregates: A,
}

impl<C: Serialize, R: Serialize + CsvRow, A: Serialize> ExperimentReport<C, R, A> {
    pub fn new(experiment: &str, config: C, rows: Vec<R>, aggregates: A) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            experiment: experiment.into(),
            generated_at: None,
            config,
            rows,
            aggregates,
        }
    }

    pub fn stamp_now(&mut self) {
        self.generated_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(R::header())?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir` and returns both paths.
    pub fn write_files(
        &self,
        dir: &Path,
        stem: &str,
        json: bool,
        csv: bool,
    ) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if json {
            let p = dir.join(format!("{stem}.json"));
            std::fs::write(&p, self.to_json()? + "\n")?;
            written.push(p);
        }
        if csv {
            let p = dir.join(format!("{stem}.csv"));
            self.write_csv(std::fs::File::create(&p)?)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Formats an optional float for CSV; missing values are empty cells.
pub fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
