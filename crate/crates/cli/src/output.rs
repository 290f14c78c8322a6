//! Tabular results and their CSV / JSON encodings.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::AppError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// Numbers with 17 significant digits, which round-trips every f64.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0" surprises in downstream tools.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>, AppError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.columns)
        .map_err(|e| AppError::io(e.to_string()))?;
    for row in &table.rows {
        let fields: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => format_number(*x),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        w.write_record(&fields)
            .map_err(|e| AppError::io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| AppError::io(e.to_string()))
}

pub fn to_json_value(table: &Table) -> Value {
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(k, c)| {
                    let v = match c {
                        Cell::Num(x) => serde_json::Number::from_f64(*x)
                            .map(Value::Number)
                            .unwrap_or(Value::Null),
                        Cell::Text(s) => Value::String(s.clone()),
                    };
                    (k.to_string(), v)
                })
                .collect();
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

pub fn encode(table: &Table, format: Format) -> Result<Vec<u8>, AppError> {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&to_json_value(table))
                .map_err(|e| AppError::io(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// `<out>.meta.json` next to the data file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    std::fs::write(path, bytes)
        .map_err(|e| AppError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_stdout(bytes: &[u8]) -> Result<(), AppError> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| AppError::io(format!("cannot write to stdout: {e}")))
}
