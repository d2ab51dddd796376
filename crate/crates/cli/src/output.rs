//! CSV tables with a '#' header block, and the run manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cache::DiskStats;
use crate::config::Cli;

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub file: String,
    /// Extra header lines (without the leading '#').
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            file: file.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Table::default()
        }
    }

    pub fn render(&self, config: &[String]) -> Result<Vec<u8>, csv::Error> {
        let mut head = format!("# sads-udw {}\n", env!("CARGO_PKG_VERSION"));
        for line in config.iter().chain(&self.notes) {
            head.push_str("# ");
            head.push_str(line);
            head.push('\n');
        }
        let mut w = csv::Writer::from_writer(head.into_bytes());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
    pub rows: usize,
}

pub fn write_table(dir: &Path, table: &Table, config: &[String]) -> std::io::Result<FileRecord> {
    let bytes = table.render(config).map_err(std::io::Error::other)?;
    std::fs::write(dir.join(&table.file), &bytes)?;
    Ok(FileRecord {
        path: table.file.clone(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len(),
        rows: table.rows.len(),
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TaskReport {
    pub task: String,
    pub vacuum: Option<String>,
    pub r_plus: Option<f64>,
    pub seconds: f64,
    pub points: usize,
    pub failed: usize,
    pub shifted: usize,
    /// Grid points per truncation outcome.
    pub truncation: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub config: &'a Cli,
    pub exit_code: i32,
    pub seconds: f64,
    pub tasks: Vec<TaskReport>,
    pub cache: DiskStats,
    pub files: Vec<FileRecord>,
}
