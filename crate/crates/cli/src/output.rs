use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::run::{Param, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.render()))?;
    }
    Ok(w.into_inner().context("flushing CSV")?)
}

pub fn json_rows(table: &Table) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let m: Map<String, Value> = table.columns.iter().cloned().zip(row.iter().map(|c| c.to_json())).collect();
            Value::Object(m)
        })
        .collect();
    json!({ "columns": table.columns, "rows": rows })
}

/// Writes the table and returns its path.
pub fn write_table(dir: &Path, name: &str, table: &Table, format: Format) -> Result<PathBuf> {
    let path = match format {
        Format::Csv => dir.join(format!("{name}.csv")),
        Format::Json => dir.join(format!("{name}.json")),
    };
    let bytes = match format {
        Format::Csv => csv_bytes(table)?,
        Format::Json => serde_json::to_vec_pretty(&json_rows(table))?,
    };
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn params_json(params: &[Param]) -> Value {
    Value::Object(params.iter().map(|(name, _, c)| (name.to_string(), c.to_json())).collect())
}
