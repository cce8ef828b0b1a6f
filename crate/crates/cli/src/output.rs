//! Tabular results and their CSV/JSON encodings.

use std::io::Write;

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
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

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    /// `None` for empty cells; non-finite numbers become `null`.
    fn json(&self) -> Option<Value> {
        match self {
            Cell::Num(x) => Some(serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number)),
            Cell::Int(i) => Some(Value::from(*i)),
            Cell::Text(s) => Some(Value::from(s.as_str())),
            Cell::Bool(b) => Some(Value::from(*b)),
            Cell::Empty => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    /// One object per row, empty cells omitted.
    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (name, cell) in self.header.iter().zip(row) {
                        if let Some(v) = cell.json() {
                            obj.insert((*name).to_string(), v);
                        }
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// A command's result: scalar fields plus one table.
pub struct Report {
    pub command: &'static str,
    pub fields: Map<String, Value>,
    pub rows_name: &'static str,
    pub table: Table,
}

impl Report {
    pub fn new(command: &'static str, rows_name: &'static str, table: Table) -> Self {
        Self { command, fields: Map::new(), rows_name, table }
    }

    pub fn field(&mut self, name: &str, value: impl Into<Value>) {
        self.fields.insert(name.to_string(), value.into());
    }

    pub fn num(&mut self, name: &str, x: f64) {
        let v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        self.fields.insert(name.to_string(), v);
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), Value::from(self.command));
        for (k, v) in &self.fields {
            obj.insert(k.clone(), v.clone());
        }
        obj.insert(self.rows_name.into(), self.table.json_rows());
        Value::Object(obj)
    }
}
