//! Run artifacts and their on-disk form: `series.tsv` and `summary.toml`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::CliError;

pub const SERIES_FILE: &str = "series.tsv";
pub const SUMMARY_FILE: &str = "summary.toml";

/// Columns of floats, one row per monitor time (or per sample of the experiment).
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Tab-separated text with a `# `-prefixed header. `{:.16e}` gives 17
    /// significant digits, enough to round-trip any double.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# {}\n", self.columns.join("\t"));
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push('\t');
                }
                write!(out, "{v:.16e}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRecord {
    pub pass: bool,
    pub value: f64,
    /// Human-readable acceptance bound, e.g. `"<= 1e-10"` or `"[0.9, 1.1]"`.
    pub bound: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub artifact_version: String,
    pub experiment: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    BlowUp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub status: Status,
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub results: toml::Table,
    pub criteria: BTreeMap<String, CriterionRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    pub summary: Summary,
    pub series: Series,
}

impl RunArtifact {
    pub fn new(config: &ExperimentConfig, experiment: &str, series: Series) -> Self {
        Self {
            summary: Summary {
                status: Status::Pass,
                provenance: Provenance {
                    schema_version: SCHEMA_VERSION,
                    artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                    experiment: experiment.to_string(),
                },
                config: config.clone(),
                results: toml::Table::new(),
                criteria: BTreeMap::new(),
            },
            series,
        }
    }

    pub fn result(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.summary.results.insert(key.to_string(), value.into());
    }

    pub fn criterion(&mut self, name: &str, pass: bool, value: f64, bound: impl Into<String>) {
        self.summary.criteria.insert(
            name.to_string(),
            CriterionRecord {
                pass,
                value,
                bound: bound.into(),
            },
        );
        if !pass && self.summary.status == Status::Pass {
            self.summary.status = Status::Fail;
        }
    }

    pub fn blow_up(&mut self, last_good_time: f64) {
        self.summary.status = Status::BlowUp;
        self.result("last_good_time", last_good_time);
    }

    /// 0 when every criterion passes, 1 on a failed criterion, 3 on blow-up.
    pub fn exit_code(&self) -> i32 {
        match self.summary.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::BlowUp => 3,
        }
    }

    pub fn summary_toml(&self) -> Result<String, CliError> {
        toml::to_string(&self.summary).map_err(|e| CliError::Runtime(format!("serializing summary: {e}")))
    }
}

/// Writes `series.tsv` and `summary.toml` into `dir`, creating it if needed.
pub fn emit_report(artifact: &RunArtifact, dir: &Path) -> Result<(), CliError> {
    let summary = artifact.summary_toml()?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let series_path = dir.join(SERIES_FILE);
    fs::write(&series_path, artifact.series.to_tsv()).map_err(io(&series_path))?;
    let summary_path = dir.join(SUMMARY_FILE);
    fs::write(&summary_path, summary).map_err(io(&summary_path))?;
    Ok(())
}
