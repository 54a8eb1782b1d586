use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use truncgauss::report::{Report, SCHEMA_VERSION};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Numeric table written as CSV (17 significant digits) or as JSON records.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.header.join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut m = Map::new();
                        for (h, x) in self.header.iter().zip(row) {
                            m.insert(h.clone(), serde_json::json!(x));
                        }
                        Value::Object(m)
                    })
                    .collect();
                let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": records });
                let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    schema_version: &'static str,
    suite: &'a str,
    all_pass: bool,
    has_violations: bool,
    checks: &'a [truncgauss::Check],
}

pub fn render_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let doc = ReportDoc {
                schema_version: SCHEMA_VERSION,
                suite: &report.suite,
                all_pass: report.all_pass(),
                has_violations: report.has_violations(),
                checks: &report.checks,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from("name,status,margin,value\n");
            for c in &report.checks {
                let status = match c.status {
                    truncgauss::Status::Pass => "pass",
                    truncgauss::Status::Fail => "fail",
                    truncgauss::Status::ViolatedClaim => "violated-claim",
                };
                out.push_str(&format!("\"{}\",{status},{:.16e},{:.16e}\n", c.name.replace('"', "\"\""), c.margin, c.value));
            }
            out
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("writing stdout: {e}")))
        }
    }
}
