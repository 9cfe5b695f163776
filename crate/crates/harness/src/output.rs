//! Result tables and their serialization.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::RunError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl Cell {
    /// CSV text; floats carry 17 significant digits, enough to round-trip.
    pub fn to_text(&self) -> String {
        match self {
            Cell::F(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::F(x) if x.is_nan() => "nan".into(),
            Cell::F(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::U(x) => x.to_string(),
            Cell::S(x) => x.clone(),
            Cell::B(x) => x.to_string(),
        }
    }

    /// JSON value; non-finite floats become strings since JSON has no
    /// representation for them.
    pub fn to_json(&self) -> Value {
        match self {
            Cell::F(x) if x.is_finite() => json!(x),
            Cell::F(_) => Value::String(self.to_text()),
            Cell::U(x) => json!(x),
            Cell::S(x) => json!(x),
            Cell::B(x) => json!(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::numerical(format!("writing {}: {e}", path.display()))
}

pub fn write_table(dir: &Path, table: &Table, format: &str) -> Result<(), RunError> {
    match format {
        "csv" => {
            let path = dir.join(format!("{}.csv", table.name));
            let mut w = csv::Writer::from_path(&path).map_err(|e| io_error(&path, e))?;
            w.write_record(&table.columns).map_err(|e| io_error(&path, e))?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::to_text)).map_err(|e| io_error(&path, e))?;
            }
            w.flush().map_err(|e| io_error(&path, e))
        }
        _ => {
            let path = dir.join(format!("{}.jsonl", table.name));
            let mut text = String::new();
            for row in &table.rows {
                let obj: serde_json::Map<String, Value> =
                    table.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                text.push_str(&Value::Object(obj).to_string());
                text.push('\n');
            }
            fs::write(&path, text).map_err(|e| io_error(&path, e))
        }
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), RunError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}
