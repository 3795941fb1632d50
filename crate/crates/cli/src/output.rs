use std::io::Write;
use std::path::Path;

use anyhow::Context;
use chainlens::report::Table;
use serde_json::Value;

use crate::args::Format;

/// A command result, renderable as CSV (the table) or JSON.
pub struct Output {
    pub table: Table,
    pub json: Option<Value>,
}

impl From<Table> for Output {
    fn from(table: Table) -> Self {
        Output { table, json: None }
    }
}

impl Output {
    pub fn with_json(table: Table, json: Value) -> Self {
        Output { table, json: Some(json) }
    }

    pub fn render(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        Ok(match format {
            Format::Csv => self.table.to_csv_string()?.into_bytes(),
            Format::Json => {
                let value = self.json.clone().unwrap_or_else(|| self.table.to_json());
                let mut text = serde_json::to_string_pretty(&value)?;
                text.push('\n');
                text.into_bytes()
            }
        })
    }
}

pub fn write(bytes: &[u8], out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Run metadata kept next to the output so the data file itself stays
/// reproducible.
pub fn write_stamp(out: &Path, argv: &[String]) -> anyhow::Result<()> {
    let mut name = out.as_os_str().to_owned();
    name.push(".stamp.json");
    let stamp = serde_json::json!({
        "generated_at": chrono::Utc::now().to_rfc3339(),
        "version": env!("CARGO_PKG_VERSION"),
        "argv": argv,
    });
    std::fs::write(&name, serde_json::to_string_pretty(&stamp)? + "\n")
        .with_context(|| format!("writing {}", Path::new(&name).display()))
}

/// Serializes to JSON with object keys in sorted order.
pub fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(value)?)
}
