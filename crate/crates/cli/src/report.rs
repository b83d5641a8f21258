//! Report serialization. Floats carry 17 significant digits so that every
//! value read back from a report is the exact `f64` that was written.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use maxbound_core::EnsembleSize;
use serde_json::{Map, Number, Value};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn json_f64(x: f64) -> Value {
    // arbitrary_precision keeps the digits exactly as formatted
    Number::from_str(&fmt_f64(x)).map(Value::Number).unwrap_or(Value::Null)
}

pub fn fmt_size(d: EnsembleSize) -> String {
    match d.as_integer() {
        Some(d) => d.to_string(),
        None => fmt_f64(d.count()),
    }
}

/// One typed cell of a report row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Float(f64),
    Size(EnsembleSize),
    Text(&'static str),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Size(d) => fmt_size(*d),
            Cell::Text(s) => s.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Empty => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => json_f64(*v),
            Cell::Size(d) => match d.as_integer() {
                Some(d) => Value::from(d),
                None => json_f64(d.count()),
            },
            Cell::Text(s) => Value::from(*s),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// A header plus rows of cells, in emission order.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json_records(&self) -> Value {
        let records = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .map(|c| c.to_string())
                    .zip(row.iter().map(Cell::json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(records)
    }
}

/// Standard output, or a file when `path` is given.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json<W: Write>(mut out: W, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
