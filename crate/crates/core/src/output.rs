//! Plain-text output: float rendering, CSV tables and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Renders a float with 17 significant digits, enough to round-trip any
/// `f64`. Non-finite values render as `nan`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// A CSV table with a fixed header row.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Full echo of a run: what was asked for, what was written, and how it
/// ended. Written next to the outputs even when the run fails.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub format: &'static str,
    pub artifact_version: &'static str,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    pub status: String,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            format: "curvecount-manifest/1",
            artifact_version: ARTIFACT_VERSION,
            command: command.to_string(),
            config,
            outputs: BTreeMap::new(),
            started_unix: unix_now(),
            finished_unix: None,
            status: "running".into(),
            error: None,
        }
    }

    pub fn record_output(&mut self, name: &str, format: &str) {
        self.outputs.insert(name.to_string(), format.to_string());
    }

    pub fn finish(&mut self, outcome: std::result::Result<(), String>) {
        self.finished_unix = Some(unix_now());
        match outcome {
            Ok(()) => self.status = "ok".into(),
            Err(e) => {
                self.status = "failed".into();
                self.error = Some(e);
            }
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.row(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.render().unwrap(), "a,b\r\n\"x,y\",1\r\n");
    }
}
