//! JSON and CSV renderings of bound reports.

use std::io::Write;

use serde::{Deserialize, Serialize};
use tribell_core::BoundReport;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateInfo {
    pub spec: String,
    pub tstate: bool,
    /// The two largest singular values of the correlation matrix.
    pub singular_values: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleInfo {
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub operator: String,
    pub strengths: [f64; 6],
    pub biases: Option<[f64; 6]>,
    /// `None` when the angles are optimized on the grid.
    pub angles: Option<[f64; 3]>,
    pub angle_grid: usize,
    /// `None` for every applicable criterion.
    pub criteria: Option<Vec<String>>,
    pub oracle: Option<OracleInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub criterion: String,
    pub operator: String,
    pub bound: f64,
    pub violated: bool,
    pub angles: Option<[f64; 3]>,
    pub oracle: Option<f64>,
    pub gap: Option<f64>,
    pub note: Option<String>,
    pub derived_from: Option<String>,
}

impl From<&BoundReport> for ReportRow {
    fn from(r: &BoundReport) -> Self {
        Self {
            criterion: r.criterion.name().to_string(),
            operator: r.criterion.operator().name().to_string(),
            bound: r.bound_value,
            violated: r.violated(),
            angles: r.achieving_angles,
            oracle: r.oracle_value,
            gap: r.gap,
            note: r.note.map(str::to_string),
            derived_from: r.derived_from.map(|c| c.name().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDocument {
    pub state: StateInfo,
    pub config: RunConfig,
    pub reports: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    /// `sqrt(s1² + s2²)`, the unbiased sharp-measurement maximum of the operator
    /// (times √2 for Svetlichny).
    pub p: f64,
    pub r_biased: f64,
    pub r_unbiased: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x: f64,
    pub reports: Vec<ReportRow>,
    pub mermin_window: Option<WindowInfo>,
    pub svetlichny_window: Option<WindowInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDocument {
    pub axis: String,
    pub range: [f64; 2],
    pub steps: usize,
    pub state: String,
    pub config: RunConfig,
    pub rows: Vec<ScanRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub instances: usize,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub seed: u64,
    pub budget: usize,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents contain finite numbers only");
    s.push('\n');
    s
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

pub const REPORT_HEADER: [&str; 11] =
    ["criterion", "operator", "bound", "violated", "theta_x", "theta_y", "theta_z", "oracle", "gap", "derived_from", "note"];

pub fn report_record(r: &ReportRow) -> Vec<String> {
    let a = r.angles;
    vec![
        r.criterion.clone(),
        r.operator.clone(),
        csv_float(r.bound),
        r.violated.to_string(),
        opt_float(a.map(|a| a[0])),
        opt_float(a.map(|a| a[1])),
        opt_float(a.map(|a| a[2])),
        opt_float(r.oracle),
        opt_float(r.gap),
        r.derived_from.clone().unwrap_or_default(),
        r.note.clone().unwrap_or_default(),
    ]
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn bound_csv(doc: &BoundDocument) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).map_err(csv_error)?;
    for r in &doc.reports {
        w.write_record(report_record(r)).map_err(csv_error)?;
    }
    finish(w)
}

pub fn scan_csv(doc: &ScanDocument) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![doc.axis.as_str()];
    header.extend(REPORT_HEADER);
    header.extend(["mermin_r_biased", "mermin_r_unbiased", "svetlichny_r_biased", "svetlichny_r_unbiased"]);
    w.write_record(&header).map_err(csv_error)?;
    for row in &doc.rows {
        let windows = [&row.mermin_window, &row.svetlichny_window]
            .into_iter()
            .flat_map(|w| [opt_float(w.as_ref().map(|w| w.r_biased)), opt_float(w.as_ref().map(|w| w.r_unbiased))]);
        let windows: Vec<String> = windows.collect();
        for r in &row.reports {
            let mut rec = vec![csv_float(row.x)];
            rec.extend(report_record(r));
            rec.extend(windows.iter().cloned());
            w.write_record(&rec).map_err(csv_error)?;
        }
    }
    finish(w)
}

pub fn verify_csv(doc: &VerifyDocument) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "instances", "tolerance", "max_deviation", "passed"]).map_err(csv_error)?;
    for s in &doc.suites {
        w.write_record([
            s.suite.clone(),
            s.instances.to_string(),
            csv_float(s.tolerance),
            csv_float(s.max_deviation),
            s.passed.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}
