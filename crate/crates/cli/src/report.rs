//! Tables and their json/csv/text renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        // `+ 0.0` turns `-0.0` into `0.0`.
        Cell::Num(x + 0.0)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => csv_quote(s),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Num(x) => six_digits(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Six significant digits, positional for moderate magnitudes.
fn six_digits(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

/// A result table with a trailing summary.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Report { command, columns: columns.to_vec(), rows: Vec::new(), summary: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        }
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let doc = json!({ "command": self.command, "rows": rows, "summary": summary });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialises");
        s.push('\n');
        s
    }

    fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::machine).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        for (k, v) in &self.summary {
            let _ = writeln!(s, "# {k}: {}", v.machine());
        }
        s
    }

    fn text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::human).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| cells.iter().map(|r| r[j].chars().count()).chain([self.columns[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |items: Vec<&str>| -> String {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut s = String::new();
        if !self.columns.is_empty() {
            s.push_str(&line(self.columns.clone()));
            for r in &cells {
                s.push_str(&line(r.iter().map(String::as_str).collect()));
            }
        }
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k}: {}", v.human());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(six_digits(std::f64::consts::PI), "3.14159");
        assert_eq!(six_digits(-1234.5678), "-1234.57");
        assert_eq!(six_digits(1.5e-9), "1.50000e-9");
        assert_eq!(Cell::Num(0.1).machine(), "1.0000000000000001e-1");
    }

    #[test]
    fn csv_has_header_rows_and_summary() {
        let mut r = Report::new("demo", &["x", "label"]);
        r.row(vec![2.0.into(), "a,b".into()]);
        r.note("pass", true);
        assert_eq!(r.render(Format::Csv), "x,label\n2.0000000000000000e0,\"a,b\"\n# pass: true\n");
    }

    #[test]
    fn json_uses_shortest_round_trip() {
        let mut r = Report::new("demo", &["x"]);
        r.row(vec![0.1.into()]);
        let v: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0]["x"], json!(0.1));
    }
}
