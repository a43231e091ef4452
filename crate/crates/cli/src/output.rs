use crate::SCHEMA_VERSION;
use cfdim::{Error, Result};
use clap::ValueEnum;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rows for the CSV form of a result.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<const N: usize>(header: [&str; N]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row<S: Into<String>, const N: usize>(mut self, cells: [S; N]) -> Self {
        self.rows.push(cells.into_iter().map(Into::into).collect());
        self
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }
}

pub struct Emit {
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl Emit {
    pub fn write(&self, command: &str, config: Value, result: Value, table: Table) -> Result<()> {
        let bytes = match self.format {
            Format::Json => {
                let doc = json!({"schema_version": SCHEMA_VERSION, "command": command, "config": config, "result": result});
                let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Domain(e.to_string()))?;
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Domain(e.to_string());
                w.write_record(["schema_version", &SCHEMA_VERSION.to_string()]).map_err(io)?;
                w.flush().map_err(|e| Error::Domain(e.to_string()))?;
                let mut w = csv::WriterBuilder::new().flexible(true).from_writer(w.into_inner().map_err(|e| Error::Domain(e.to_string()))?);
                w.write_record(&table.header).map_err(io)?;
                for r in &table.rows {
                    w.write_record(r).map_err(io)?;
                }
                w.into_inner().map_err(|e| Error::Domain(e.to_string()))?
            }
        };
        self.write_raw(&bytes)
    }

    pub fn write_raw(&self, bytes: &[u8]) -> Result<()> {
        let res = match &self.output {
            Some(p) => std::fs::write(p, bytes),
            None => std::io::stdout().lock().write_all(bytes),
        };
        res.map_err(|e| Error::Domain(format!("writing output: {e}")))
    }
}
