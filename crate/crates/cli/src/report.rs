//! Tabular command output. CSV carries a `#` header line with the run
//! parameters followed by one table; JSON carries the same table plus the
//! summary and the pass/fail checks. Checks and summary also go to stderr.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    /// Table rendering: floats with 17 significant digits.
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    /// Header and summary rendering: shortest round-trip form.
    fn short(&self) -> String {
        match self {
            Cell::Num(v) if *v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) => format!("{v}"),
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => Value::from(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Report {
            command,
            meta: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, v: impl Into<Cell>) {
        self.meta.push((key.to_string(), v.into()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn summary(&mut self, key: impl Into<String>, v: impl Into<Cell>) {
        self.summary.push((key.into(), v.into()));
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut head = format!("# kwverify {}", self.command);
                for (k, v) in &self.meta {
                    let _ = write!(head, " {k}={}", v.short());
                }
                writeln!(w, "{head}")?;
                writeln!(w, "{}", self.columns.join(","))?;
                for r in &self.rows {
                    let line: Vec<String> = r.iter().map(Cell::csv).collect();
                    writeln!(w, "{}", line.join(","))?;
                }
            }
            Format::Json => {
                let obj = |pairs: &[(String, Cell)]| {
                    Value::Object(pairs.iter().map(|(k, v)| (k.clone(), v.json())).collect::<Map<_, _>>())
                };
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect::<Map<_, _>>(),
                        )
                    })
                    .collect();
                let checks: Vec<Value> = self
                    .checks
                    .iter()
                    .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
                    .collect();
                let doc = json!({
                    "command": self.command,
                    "parameters": obj(&self.meta),
                    "columns": self.columns,
                    "rows": rows,
                    "summary": obj(&self.summary),
                    "checks": checks,
                    "pass": self.passed(),
                });
                serde_json::to_writer_pretty(&mut w, &doc)?;
                writeln!(w)?;
            }
        }
        w.flush()
    }

    /// Human-readable summary and check lines.
    pub fn write_diagnostics<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.summary {
            writeln!(w, "{k}: {}", v.short())?;
        }
        for c in &self.checks {
            writeln!(w, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}
