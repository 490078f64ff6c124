//! Report types and their JSON / CSV encodings.
//!
//! JSON carries every number at full precision. CSV tables round to three
//! significant digits in the style `3.19E-03`, with `NA` for undefined
//! entries.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub example: Option<u8>,
    pub domain: String,
    pub k: usize,
    pub post: Vec<&'static str>,
    pub levels_requested: [u32; 2],
    /// Mesh `T_j` is level `j + table_offset`.
    pub table_offset: u32,
    pub references: Vec<ReferenceOut>,
    pub runs: Vec<ElementRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceOut {
    pub index: usize,
    /// Absent when no level was solved and no exact value is known.
    pub value: Option<f64>,
    /// False for values computed on the finest mesh by conforming P1.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementRun {
    pub element: &'static str,
    /// First level dropped for exceeding the unknown limit.
    pub truncated_at: Option<u32>,
    pub levels: Vec<LevelOut>,
    pub tables: Vec<Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelOut {
    pub level: u32,
    pub mesh: String,
    pub h: f64,
    pub n_dofs: usize,
    pub ppr_fallback: usize,
    pub eigen: Vec<EigenOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<FieldOut>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenOut {
    pub index: usize,
    pub lambda_h: f64,
    pub residual: f64,
    pub estimator: Option<EstimatorOut>,
    pub lambda_p1star: Option<f64>,
    pub f_p1star: Option<f64>,
    pub lambda_cea: Option<f64>,
    pub lambda_exp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorOut {
    pub lambda_h: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub lambda_rea: f64,
    pub term_gradient: f64,
    pub term_interp: f64,
}

/// An eigenfunction and, when computed, its recovered gradient sampled
/// at edge midpoints as `[x, y, g1, g2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldOut {
    pub index: usize,
    pub kind: &'static str,
    pub values: Vec<f64>,
    pub recovered: Option<Vec<[f64; 4]>>,
}

/// Convergence history of one eigenvalue for one element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub element: &'static str,
    pub index: usize,
    pub reference: Option<f64>,
    pub reference_exact: bool,
    pub rows: Vec<ConvergenceRow>,
}

/// Errors are signed, `lambda_approx - lambda`. Orders are
/// `log2(|e_2h| / |e_h|)` against the previous row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub mesh: String,
    pub h: f64,
    pub n_dofs: usize,
    pub lambda_h: f64,
    pub error: Option<f64>,
    pub order: Option<f64>,
    pub error_rea: Option<f64>,
    pub order_rea: Option<f64>,
    pub error_cea: Option<f64>,
    pub order_cea: Option<f64>,
    pub error_exp: Option<f64>,
    pub order_exp: Option<f64>,
}

pub const CSV_HEADER: [&str; 13] = [
    "level", "mesh", "h", "n_dofs", "lambda_h", "error", "order", "error_rea", "order_rea", "error_cea", "order_cea",
    "error_exp", "order_exp",
];

/// Three significant digits, two-digit signed exponent: `-8.47E-02`.
pub fn sci3(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let s = format!("{x:.2E}");
    let (m, e) = s.split_once('E').expect("exponent");
    let e: i32 = e.parse().expect("integer exponent");
    format!("{m}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), sci3)
}

/// Orders are printed with two decimals, as in published rate rows.
fn order(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map_or_else(|| "NA".into(), |v| format!("{v:.2}"))
}

impl ConvergenceRow {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.level.to_string(),
            self.mesh.clone(),
            sci3(self.h),
            self.n_dofs.to_string(),
            sci3(self.lambda_h),
            opt(self.error),
            order(self.order),
            opt(self.error_rea),
            order(self.order_rea),
            opt(self.error_cea),
            order(self.order_cea),
            opt(self.error_exp),
            order(self.order_exp),
        ]
    }
}

/// File name of a table's CSV, e.g. `cr_lambda1.csv` (1-based index).
pub fn table_file(t: &Table) -> String {
    format!("{}_lambda{}.csv", t.element, t.index + 1)
}

pub fn write_csv(t: &Table, path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in &t.rows {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Writes `report.json`, or one CSV per table plus `truncation.txt` when
/// any run was cut short. Returns the files written.
pub fn write_report(report: &ExperimentReport, format: Format, dir: &Path) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match format {
        Format::Json => {
            let p = dir.join("report.json");
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            fs::write(&p, s)?;
            files.push(p);
        }
        Format::Csv => {
            for run in &report.runs {
                for t in &run.tables {
                    let p = dir.join(table_file(t));
                    write_csv(t, &p)?;
                    files.push(p);
                }
            }
            let cut: Vec<String> = report
                .runs
                .iter()
                .filter_map(|r| r.truncated_at.map(|l| format!("{} truncated at level {l}\n", r.element)))
                .collect();
            if !cut.is_empty() {
                let p = dir.join("truncation.txt");
                fs::write(&p, cut.concat())?;
                files.push(p);
            }
        }
    }
    Ok(files)
}
