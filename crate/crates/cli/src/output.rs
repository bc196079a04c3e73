//! Result tables and the three files written per run.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::RunError;

/// Version tag written into every output file.
pub const FORMAT_VERSION: &str = "specshift-results/1";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = format!("# format={FORMAT_VERSION} config_sha256={hash}\n");
        out += &self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out += &cells.join(",");
            out.push('\n');
        }
        out
    }
}

/// A declared scientific check; a failed check makes the run exit with 2.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// SHA-256 of the config with runtime-only fields removed.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(&cfg.hashed_view()).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome, threads: usize) -> Result<(), RunError> {
    fs::create_dir_all(dir)?;
    let hash = config_hash(cfg);
    write_file(&dir.join("results.csv"), &outcome.table.to_csv(&hash))?;
    let summary = json!({
        "format": FORMAT_VERSION,
        "config_sha256": hash,
        "kind": cfg.kind,
        "passed": outcome.passed(),
        "summary": outcome.summary,
        "checks": outcome.checks,
        "warnings": outcome.warnings,
    });
    write_file(&dir.join("summary.json"), &(serde_json::to_string_pretty(&summary).expect("json") + "\n"))?;
    let resolved = json!({
        "format": FORMAT_VERSION,
        "config_sha256": hash,
        "config": cfg.hashed_view(),
        "runtime": { "threads": threads, "output": dir.display().to_string() },
    });
    write_file(&dir.join("config.resolved.json"), &(serde_json::to_string_pretty(&resolved).expect("json") + "\n"))?;
    Ok(())
}
