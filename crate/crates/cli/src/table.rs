//! Comma-separated result tables with a commented metadata header.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a row
//! re-fed as a point spec reproduces its metric columns bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seconds since the Unix epoch; honors SOURCE_DATE_EPOCH so reproducible
/// runs can pin the header timestamp.
fn timestamp() -> u64 {
    if let Ok(v) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(t) = v.parse::<u64>() {
            return t;
        }
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    command: String,
    config_hash: String,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

/// One table cell; numbers keep their native formatting.
pub trait Cell {
    fn render(&self) -> String;
}

impl Cell for f64 {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Cell for u64 {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Cell for u32 {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Cell for bool {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Cell for &str {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Cell for String {
    fn render(&self) -> String {
        self.clone()
    }
}

impl ResultTable {
    pub fn new(command: &str, config_hash: &str, columns: Vec<&'static str>) -> Self {
        ResultTable {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row width must match the column set");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# pld v{TOOL_VERSION}");
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# config-hash: {}", self.config_hash);
        let _ = writeln!(out, "# timestamp: {}", timestamp());
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, out: Option<&Path>) -> Result<(), CliError> {
        let body = self.render();
        match out {
            Some(path) => fs::write(path, body)
                .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(body.as_bytes())
                    .map_err(|e| CliError::Internal(format!("cannot write to stdout: {e}")))
            }
        }
    }
}

/// Builds one row from heterogeneous cells.
#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => {
        vec![$($crate::table::Cell::render(&$cell)),*]
    };
}
