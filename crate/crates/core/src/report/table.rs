use std::io::{Read, Write};
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Null,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::Float)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            // `Display` for f64 is the shortest string that parses back exactly.
            Cell::Float(v) => v.to_string(),
            Cell::Null => String::new(),
        }
    }

    /// Reads a CSV field back. A field becomes a number only if it is the
    /// canonical rendering of that number, so rewriting never changes bytes.
    fn parse(field: &str) -> Cell {
        if field.is_empty() {
            return Cell::Null;
        }
        if let Ok(v) = field.parse::<i64>() {
            if v.to_string() == field {
                return Cell::Int(v);
            }
        }
        if let Ok(v) = field.parse::<f64>() {
            if v.is_finite() && v.to_string() == field {
                return Cell::Float(v);
            }
        }
        Cell::Text(field.to_string())
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Null => Value::Null,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
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

/// A rectangular table with named columns. Null cells are empty in CSV and
/// `null` in JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render))?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let columns = input.headers()?.iter().map(str::to_string).collect();
        let rows = input
            .records()
            .map(|rec| Ok(rec?.iter().map(Cell::parse).collect()))
            .collect::<Result<_>>()?;
        Ok(Table { columns, rows })
    }

    /// An array with one object per row, keys in column order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.clone(), v.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write<W: Write>(&self, format: Format, mut writer: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(writer),
            Format::Json => {
                serde_json::to_writer_pretty(&mut writer, &self.to_json())?;
                writeln!(writer).map_err(|e| Error::Csv(e.into()))?;
                Ok(())
            }
        }
    }
}

/// Writes `table` to `path`; I/O failures carry the path.
pub fn write_table(table: &Table, format: Format, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    table.write(format, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
