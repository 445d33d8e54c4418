//! Report tables: a config echo header, named columns and rows, written as
//! delimiter-separated values or JSON lines.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Delimiter-separated values with `#` header lines.
    Dsv,
    /// One JSON object per line.
    Jsonl,
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl Table {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        Table {
            command: command.into(),
            columns: columns.to_vec(),
            ..Table::default()
        }
    }

    pub fn echo(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(
        &self,
        out: &mut dyn Write,
        format: Format,
        delimiter: &str,
        timestamp: Option<u64>,
    ) -> Result<()> {
        match format {
            Format::Dsv => self.write_dsv(out, delimiter, timestamp),
            Format::Jsonl => self.write_jsonl(out, timestamp),
        }
    }

    fn write_dsv(
        &self,
        out: &mut dyn Write,
        delimiter: &str,
        timestamp: Option<u64>,
    ) -> Result<()> {
        writeln!(out, "# sofic {}", self.command)?;
        if let Some(t) = timestamp {
            writeln!(out, "# timestamp: {t}")?;
        }
        for (k, v) in &self.config {
            writeln!(out, "# {k}: {v}")?;
        }
        writeln!(out, "{}", self.columns.join(delimiter))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.replace(delimiter, " ")).collect();
            writeln!(out, "{}", cells.join(delimiter))?;
        }
        for (k, v) in &self.summary {
            writeln!(out, "# {k}: {v}")?;
        }
        Ok(())
    }

    fn write_jsonl(&self, out: &mut dyn Write, timestamp: Option<u64>) -> Result<()> {
        let mut header = Map::new();
        header.insert("command".into(), Value::String(self.command.clone()));
        if let Some(t) = timestamp {
            header.insert("timestamp".into(), Value::from(t));
        }
        let config: Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        header.insert("config".into(), Value::Object(config));
        writeln!(out, "{}", Value::Object(header))?;
        for row in &self.rows {
            let record: Map<String, Value> = self
                .columns
                .iter()
                .zip(row)
                .map(|(k, v)| {
                    let value = if v.is_empty() {
                        Value::Null
                    } else {
                        Value::String(v.clone())
                    };
                    (k.to_string(), value)
                })
                .collect();
            writeln!(out, "{}", Value::Object(record))?;
        }
        if !self.summary.is_empty() {
            let summary: Map<String, Value> = self
                .summary
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect();
            let mut wrapper = Map::new();
            wrapper.insert("summary".into(), Value::Object(summary));
            writeln!(out, "{}", Value::Object(wrapper))?;
        }
        Ok(())
    }
}

/// Rows of a previously written table: column names and cells.
pub fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines
        .first()
        .is_some_and(|l| l.trim_start().starts_with('{'))
    {
        let mut columns: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in lines.iter().enumerate() {
            let value: Value =
                serde_json::from_str(line).map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1))?;
            let Some(obj) = value.as_object() else {
                continue;
            };
            if obj.contains_key("config") || obj.contains_key("summary") {
                continue;
            }
            if columns.is_empty() {
                columns = obj.keys().cloned().collect();
            }
            rows.push(
                columns
                    .iter()
                    .map(|c| obj.get(c).and_then(Value::as_str).unwrap_or("").to_string())
                    .collect(),
            );
        }
        return Ok((columns, rows));
    }
    let mut data = lines.into_iter().filter(|l| !l.starts_with('#'));
    let header = data
        .next()
        .ok_or_else(|| anyhow::anyhow!("table has no header row"))?;
    let delimiter = if header.contains('\t') { "\t" } else { "," };
    let columns: Vec<String> = header.split(delimiter).map(str::to_string).collect();
    let rows = data
        .map(|l| l.split(delimiter).map(str::to_string).collect())
        .collect();
    Ok((columns, rows))
}
