use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA: &str = "fracyule/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: Option<&str>) -> Result<Self, CliError> {
        match s {
            None | Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(CliError::Config(format!("unknown format `{other}` (csv or json)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => "nan".into(),
            Cell::Float(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

/// A command's result as a CSV table and as a JSON value.
#[derive(Debug, Clone)]
pub struct Output {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub json: Value,
}

impl Output {
    pub fn new(header: Vec<&'static str>, json: impl Serialize) -> Result<Self, CliError> {
        Ok(Output {
            header,
            rows: Vec::new(),
            json: serde_json::to_value(json).map_err(|e| CliError::Config(e.to_string()))?,
        })
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'a str,
    command: &'a str,
    config: &'a BTreeMap<String, String>,
    results: &'a Value,
}

pub fn render(out: &Output, format: Format, command: &str, config: &BTreeMap<String, String>) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
            w.write_record(&out.header).map_err(io)?;
            for r in &out.rows {
                w.write_record(r.iter().map(Cell::render)).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
        }
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA,
                command,
                config,
                results: &out.json,
            };
            let mut v = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
            v.push(b'\n');
            Ok(v)
        }
    }
}

pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}
