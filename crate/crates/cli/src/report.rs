//! Report documents and their CSV/JSON renderings.
//!
//! CSV layout:
//!
//! ```text
//! # hessq-lab v<semver>
//! # generated_unix=<seconds>
//! # <key>=<value>        (config echo, seed, decisions, tolerances)
//! <column>,<column>,…
//! <row>                  (data rows)
//! # result.<key>=<value> (summary, including status)
//! ```
//!
//! The JSON document carries the same header, columns, rows and summary.
//! Reals are written with 17 significant digits. The body is everything but
//! the `generated_unix` line.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => real(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => json!(real(*x)),
            Cell::Text(s) => json!(s),
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.csv())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// `{:.16e}`, which round-trips every finite `f64`.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.header.push((key.into(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    /// Sets a summary entry; a repeated key keeps its position and takes the new value.
    pub fn result(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        let (key, value) = (key.into(), value.into());
        match self.summary.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.summary.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: Format, generated_unix: Option<u64>) -> String {
        match format {
            Format::Csv => self.csv(generated_unix),
            Format::Json => self.json(generated_unix),
        }
    }

    fn csv(&self, generated_unix: Option<u64>) -> String {
        let mut out = format!("# {}\n", crate::TOOL_LINE);
        if let Some(t) = generated_unix {
            let _ = writeln!(out, "# generated_unix={t}");
        }
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# result.{k}={}", v.csv());
        }
        out
    }

    fn json(&self, generated_unix: Option<u64>) -> String {
        let mut header = Map::new();
        header.insert("tool".into(), json!(crate::TOOL_LINE));
        if let Some(t) = generated_unix {
            header.insert("generated_unix".into(), json!(t));
        }
        for (k, v) in &self.header {
            header.insert(k.clone(), json!(v));
        }
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let doc = json!({
            "header": header,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "summary": summary,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Drops the timestamp from a rendered report.
pub fn body(rendered: &str) -> String {
    rendered
        .lines()
        .filter(|l| !l.starts_with("# generated_unix=") && !l.trim_start().starts_with("\"generated_unix\""))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_and_json_carry_the_same_data() {
        let mut r = Report::new(&["a", "b"]);
        r.meta("seed", 7);
        r.row(vec![1usize.into(), 0.5.into()]);
        r.result("status", "pass");
        let csv = r.render(Format::Csv, Some(3));
        assert!(csv.starts_with("# hessq-lab v"));
        assert!(csv.contains("1,5.0000000000000000e-1\n"));
        assert_eq!(body(&csv).lines().count(), csv.lines().count() - 1);
        let v: Value = serde_json::from_str(&r.render(Format::Json, Some(3))).unwrap();
        assert_eq!(v["rows"][0][1], json!("5.0000000000000000e-1"));
        assert_eq!(v["summary"]["status"], json!("pass"));
        assert_eq!(v["header"]["seed"], json!("7"));
    }
}
