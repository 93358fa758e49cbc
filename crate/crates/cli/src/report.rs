use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "maslov-lab.report.v1";

/// A flat table for CSV output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a command produced, before it is wrapped into a [`Report`].
pub struct Outcome {
    pub results: serde_json::Value,
    pub table: Table,
    /// Exact identities that failed.
    pub violations: usize,
    /// Truncations that did not stabilise before `m_max`.
    pub unstabilized: usize,
}

#[derive(Debug, Serialize)]
pub struct Status {
    pub status: &'static str,
    pub violations: usize,
    pub unstabilized: usize,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
    pub outcome: Status,
    pub results: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, f64>>,
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    /// Exit code: 2 for a violated identity, 3 for an unstabilised
    /// truncation, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.outcome.violations > 0 {
            2
        } else if self.outcome.unstabilized > 0 {
            3
        } else {
            0
        }
    }
}

pub fn status(violations: usize, unstabilized: usize) -> Status {
    let status = if violations > 0 {
        "violation"
    } else if unstabilized > 0 {
        "unstabilized"
    } else {
        "ok"
    };
    Status { status, violations, unstabilized }
}

pub fn write_json(report: &Report, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv(table: &Table, out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
