//! Report records and their CSV / JSON / markdown renderings.

use std::io::Write;
use std::path::Path;

use illposed_core::IterationReport;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Markdown,
}

/// One checkpoint of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub k: u64,
    pub rel_error: Option<f64>,
    pub successive_diff: f64,
    pub residual: f64,
    pub iterate: Vec<f64>,
}

/// Serializable mirror of an [`IterationReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub problem: String,
    pub termination: String,
    pub final_k: u64,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub checkpoints: Vec<ReportRow>,
}

impl ReportRecord {
    pub fn from_report(problem: &str, report: &IterationReport<f64>, warnings: Vec<String>) -> Self {
        ReportRecord {
            problem: problem.to_string(),
            termination: report.termination.name().to_string(),
            final_k: report.final_k,
            warnings,
            checkpoints: report
                .checkpoints
                .iter()
                .map(|c| ReportRow {
                    k: c.k,
                    rel_error: c.error_vs_reference,
                    successive_diff: c.successive_diff,
                    residual: c.residual,
                    iterate: c.iterate.coeffs().to_vec(),
                })
                .collect(),
        }
    }

    pub fn frame(&self) -> Frame {
        let mut rows: Vec<&ReportRow> = self.checkpoints.iter().collect();
        rows.sort_by_key(|r| r.k);
        Frame {
            title: format!("{} ({})", self.problem, self.termination),
            headers: ["k", "rel_error", "successive_diff", "residual"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            rows: rows
                .into_iter()
                .map(|r| {
                    vec![
                        Cell::Int(r.k),
                        r.rel_error.map_or(Cell::Missing, Cell::Num),
                        Cell::Num(r.successive_diff),
                        Cell::Num(r.residual),
                    ]
                })
                .collect(),
        }
    }
}

/// Relative errors indexed by (row label, step count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub row_header: String,
    pub columns: Vec<u64>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub values: Vec<f64>,
}

impl Table {
    pub fn value(&self, row: usize, column: usize) -> f64 {
        self.rows[row].values[column]
    }

    /// Long form `row,k,rel_error`.
    pub fn frame(&self) -> Frame {
        let mut rows = Vec::new();
        for r in &self.rows {
            for (k, v) in self.columns.iter().zip(&r.values) {
                rows.push(vec![Cell::Text(r.label.clone()), Cell::Int(*k), Cell::Num(*v)]);
            }
        }
        Frame {
            title: self.title.clone(),
            headers: vec![self.row_header.clone(), "k".into(), "rel_error".into()],
            rows,
        }
    }

    /// Rows by label, one column per step count, errors in percent.
    pub fn markdown(&self) -> String {
        let mut out = format!("### {}\n\n| {} |", self.title, self.row_header);
        for k in &self.columns {
            out.push_str(&format!(" m = {} |", steps_label(*k)));
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(self.columns.len()));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("| {} |", r.label));
            for v in &r.values {
                out.push_str(&format!(" {}% |", format_sig(100.0 * v)));
            }
            out.push('\n');
        }
        out
    }
}

fn steps_label(k: u64) -> String {
    let mut e = 0;
    let mut v = k;
    while v >= 10 && v.is_multiple_of(10) {
        v /= 10;
        e += 1;
    }
    if v == 1 && e >= 2 {
        format!("10^{e}")
    } else {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Num(x) => format_sci(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

/// Header plus rows, rendered as CSV or a markdown table.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Frame {
    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| BenchError::io("<csv buffer>", std::io::Error::other(e));
        w.write_record(&self.headers).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| BenchError::io("<csv buffer>", std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn markdown(&self) -> String {
        let mut out = format!("### {}\n\n| {} |\n|", self.title, self.headers.join(" | "));
        out.push_str(&"---|".repeat(self.headers.len()));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_sig(*x),
                    Cell::Missing => "-".into(),
                    other => other.render(),
                })
                .collect();
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        out
    }
}

/// Scientific notation with six significant digits.
pub fn format_sci(x: f64) -> String {
    format!("{x:.5e}")
}

/// Six significant digits, fixed notation for moderate magnitudes.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    } else {
        format_sci(x)
    }
}

pub fn render_report(rec: &ReportRecord, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => rec.frame().csv(),
        OutputFormat::Json => to_json(rec),
        OutputFormat::Markdown => Ok(rec.frame().markdown()),
    }
}

pub fn render_table(table: &Table, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => table.frame().csv(),
        OutputFormat::Json => to_json(table),
        OutputFormat::Markdown => Ok(table.markdown()),
    }
}

/// Pretty JSON; floats use the shortest representation that parses back to the same value.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| BenchError::io("<json buffer>", std::io::Error::other(e)))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report_json(text: &str) -> Result<ReportRecord> {
    serde_json::from_str(text).map_err(|e| BenchError::config(format!("report JSON: {e}")))
}

/// Writes via a temporary file in the target directory followed by a rename, so readers
/// never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| BenchError::io(tmp.path(), e))?;
    tmp.flush().map_err(|e| BenchError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}

/// Writes `text` to `path`, or returns it for the caller to print when no path is given.
pub fn emit(text: String, path: Option<&Path>) -> Result<Option<String>> {
    match path {
        Some(p) => {
            write_atomic(p, text.as_bytes())?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rows: usize) -> ReportRecord {
        ReportRecord {
            problem: "elliptic".into(),
            termination: "schedule_complete".into(),
            final_k: rows as u64 * 10,
            warnings: vec![],
            checkpoints: (1..=rows)
                .map(|i| ReportRow {
                    k: i as u64 * 10,
                    rel_error: Some(0.1 / i as f64),
                    successive_diff: 1.0 / 3.0,
                    residual: 2e-17,
                    iterate: vec![0.1, 1.0 / 7.0],
                })
                .collect(),
        }
    }

    #[test]
    fn csv_shapes() {
        let empty = render_report(&record(0), OutputFormat::Csv).unwrap();
        assert_eq!(empty, "k,rel_error,successive_diff,residual\n");
        let one = render_report(&record(1), OutputFormat::Csv).unwrap();
        assert_eq!(one.lines().count(), 2);
        assert_eq!(one.lines().nth(1).unwrap(), "10,1.00000e-1,3.33333e-1,2.00000e-17");
    }

    #[test]
    fn json_round_trip() {
        let r = record(3);
        let back = parse_report_json(&render_report(&r, OutputFormat::Json).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.4737962220527014), "0.473796");
        assert_eq!(format_sig(47.37962220527014), "47.3796");
        assert_eq!(format_sig(5.7005e-4), "0.000570050");
        assert_eq!(format_sig(4.86e-12), "4.86000e-12");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn table_rendering() {
        let t = Table {
            title: "t".into(),
            row_header: "mode".into(),
            columns: vec![100, 1000, 5],
            rows: vec![TableRow {
                label: "1".into(),
                values: vec![0.5, 0.25, 1.0],
            }],
        };
        let md = t.markdown();
        assert!(md.contains("m = 10^2"));
        assert!(md.contains("m = 5"));
        assert!(md.contains("50.0000%"));
        let csv = render_table(&t, OutputFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("mode,k,rel_error\n1,100,5.00000e-1\n"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
        let missing = dir.path().join("no/such/dir/out.csv");
        assert_eq!(write_atomic(&missing, b"x").unwrap_err().exit_code(), 4);
    }
}
