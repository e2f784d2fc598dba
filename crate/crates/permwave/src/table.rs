//! Column tables rendered as CSV or JSON.
//!
//! Numbers use Rust's shortest round-trip formatting, which never depends on
//! the locale.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u128),
    Text(String),
    /// Not applicable for this row.
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v.into())
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u128)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            // Debug switches to exponent notation outside [1e-5, 1e16).
            Cell::Float(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // Non-finite values become null.
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => u64::try_from(*v).map_or_else(|_| Value::String(v.to_string()), Value::from),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text)).expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }

    /// An array with one object per row.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| ((*c).to_owned(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => json_bytes(&self.to_json()),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("JSON values always serialise");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_lists_and_leaves_gaps() {
        let mut t = Table::new(&["index", "perm", "x"]);
        t.push(vec![1u64.into(), "0,1,2".into(), Cell::Empty]);
        t.push(vec![2u64.into(), "2,1,0".into(), 0.1.into()]);
        assert_eq!(String::from_utf8(t.to_csv()).unwrap(), "index,perm,x\n1,\"0,1,2\",\n2,\"2,1,0\",0.1\n");
    }

    #[test]
    fn json_keeps_column_order_and_nulls() {
        let mut t = Table::new(&["b", "a"]);
        t.push(vec![f64::INFINITY.into(), Cell::Int(u128::MAX)]);
        let text = String::from_utf8(t.render(Format::Json)).unwrap();
        assert!(text.find("\"b\"").unwrap() < text.find("\"a\"").unwrap());
        assert!(text.contains("null"));
        assert!(text.contains(&format!("\"{}\"", u128::MAX)));
    }
}
