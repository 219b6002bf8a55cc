use std::io::Write;

use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.15e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) | Cell::Empty => Value::Null,
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| CliError::Usage(format!("csv output: {e}"));
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                w.into_inner().map_err(|e| CliError::Usage(format!("csv output: {e}")))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                let doc = json!({ "columns": self.columns, "rows": rows });
                let mut out = serde_json::to_vec_pretty(&doc).expect("json serializes");
                out.push(b'\n');
                Ok(out)
            }
        }
    }

    pub fn write(&self, format: Format, out: Option<&std::path::Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        let result = match out {
            Some(path) => std::fs::write(path, &bytes),
            None => std::io::stdout().lock().write_all(&bytes),
        };
        result.map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_sixteen_digits() {
        let mut t = Table::new(&["k", "lambda", "flag", "order"]);
        t.push(vec![1.into(), 0.1.into(), true.into(), Cell::Empty]);
        let s = String::from_utf8(t.render(Format::Csv).unwrap()).unwrap();
        assert_eq!(s, "k,lambda,flag,order\n1,1.000000000000000e-1,1,\n");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["k", "v"]);
        t.push(vec![2.into(), f64::NAN.into()]);
        let v: Value = serde_json::from_slice(&t.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["columns"][1], "v");
        assert_eq!(v["rows"][0][0], 2);
        assert!(v["rows"][0][1].is_null());
    }
}
