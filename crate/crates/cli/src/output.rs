//! CSV and JSON emitters.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64` (at most 17 significant digits), so both formats carry identical
//! values and repeated runs are byte-identical.

use serde_json::Value;

/// Shortest round-trip scientific notation, e.g. `4.234810812542093e-7`.
pub fn number(v: f64) -> String {
    format!("{v:e}")
}

/// Empty cell for a missing value.
pub fn optional(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| quote(c)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}
