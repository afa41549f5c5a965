//! CSV results with `#` metadata lines.

use std::fmt::Write as _;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::Result;

/// Header plus rows, every cell already formatted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Full-precision float cell; non-finite values print as `inf`, `-inf`, `nan`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Result of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub name: String,
    pub kind: String,
    pub model: String,
    pub point: Vec<f64>,
    pub seed: u64,
    /// Effective parameters after defaults.
    pub parameters: Vec<(String, String)>,
    /// Headline numbers, also echoed as metadata.
    pub summary: Vec<(String, String)>,
    pub table: Table,
}

impl ExperimentOutput {
    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Metadata block; the timestamp line is the only nondeterministic one.
    pub fn metadata(&self, with_timestamp: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# experiment={}", self.name);
        let _ = writeln!(s, "# kind={}", self.kind);
        let _ = writeln!(s, "# model={}", self.model);
        let pt: Vec<String> = self.point.iter().map(|v| format!("{v:.12}")).collect();
        let _ = writeln!(s, "# point={}", pt.join(" "));
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# version={}", env!("CARGO_PKG_VERSION"));
        if with_timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            let _ = writeln!(s, "# timestamp={secs}");
        }
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "# param.{k}={v}");
        }
        for (k, v) in &self.summary {
            let _ = writeln!(s, "# result.{k}={v}");
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.metadata(true).as_bytes())?;
        w.write_all(self.table.to_csv().as_bytes())?;
        Ok(())
    }

    /// CSV without the timestamp line.
    pub fn deterministic_csv(&self) -> String {
        let mut s = self.metadata(false);
        s.push_str(&self.table.to_csv());
        s
    }
}
