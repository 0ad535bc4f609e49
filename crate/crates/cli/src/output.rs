//! CSV tables and the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use deeppoly::Target;

use crate::error::{CliError, CliResult};
use crate::record::RunRecord;

/// Points of every sampled curve.
pub const CURVE_POINTS: usize = 1001;

pub fn curve_grid() -> impl Iterator<Item = f64> {
    (0..CURVE_POINTS).map(|i| -1.0 + 2.0 * i as f64 / (CURVE_POINTS - 1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(name: impl Into<String>, header: Vec<String>) -> Self {
        Self { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        let io = |e: csv::Error| CliError::Io { path: path.clone(), source: e.into() };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Shortest round-trip decimal; non-finite values print as `inf`/`NaN`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// `(x, f(x), g(x), g(x) - f(x))` on the curve grid.
pub fn curve_table(name: &str, target: &Target, g: impl Fn(f64) -> f64) -> Table {
    let mut t = Table::new(name, &["x", "f", "g", "residual"]);
    for x in curve_grid() {
        let (f, gx) = (target.eval(x), g(x));
        t.push_floats(&[x, f, gx, gx - f]);
    }
    t
}

/// A finished command: its record and the tables to write beside it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub record: RunRecord,
    pub tables: Vec<Table>,
}

impl Outcome {
    /// Writes `run.json` and every table; returns the written paths.
    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let run = dir.join("run.json");
        self.record.write(&run)?;
        let mut paths = vec![run];
        for t in &self.tables {
            paths.push(t.write(dir)?);
        }
        Ok(paths)
    }
}
