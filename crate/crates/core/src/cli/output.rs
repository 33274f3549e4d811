//! Tables and their CSV/JSON rendering.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};
use thiserror::Error;

use super::config::OutputFormat;

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("no rows to write")]
    Empty,
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back to the rounded value. Zero of either sign prints as `0`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    format!("{}", round_significant(x))
}

fn round_significant(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) if *v == 0.0 => Value::from(0),
            Cell::Float(v) => Number::from_f64(round_significant(*v))
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let object: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(key, cell)| (key.clone(), cell.json()))
                    .collect();
                Value::Object(object)
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&Value::Array(rows)).expect("plain values serialize");
        out.push('\n');
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Writes `table` to `path`, or stdout when `path` is `None`. Nothing is
/// created for an empty table.
pub fn emit(table: &Table, format: OutputFormat, path: Option<&Path>) -> Result<(), EmitError> {
    if table.is_empty() {
        return Err(EmitError::Empty);
    }
    let text = table.render(format);
    match path {
        Some(path) => std::fs::write(path, text).map_err(|e| EmitError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| EmitError::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
        }
    }
}
