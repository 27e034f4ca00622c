//! Artifact rendering. JSON carries the summary; CSV carries series. Both
//! embed the tool version and the resolved spec, use LF line endings and keep
//! field order fixed, so an artifact regenerated from its own spec matches
//! byte for byte.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::CliError;

pub const HEADER_PREFIX: &str = "#@evograph ";

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Field name for the rows in JSON output.
    pub key: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(key: &'static str, columns: &[&str]) -> Self {
        Table {
            key,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn row_objects(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().cloned()).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// A CSV side file (trajectory, state table) written next to the main output.
#[derive(Debug, Clone, PartialEq)]
pub struct SideFile {
    pub path: PathBuf,
    pub table: Table,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Artifact {
    pub summary: Map<String, Value>,
    pub table: Option<Table>,
    /// Replaces the rendered summary entirely (edge lists).
    pub body: Option<String>,
    pub side_files: Vec<SideFile>,
    /// Written out, then reported with a nonzero status.
    pub failure: Option<CliError>,
}

impl Artifact {
    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Summary entries that fit in one CSV cell.
    pub fn scalar_summary(&self) -> Vec<(String, Value)> {
        self.summary
            .iter()
            .filter(|(_, v)| !v.is_array() && !v.is_object())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

pub fn header(spec: &Map<String, Value>) -> String {
    let mut out = format!("{HEADER_PREFIX}{}\n", evograph::VERSION);
    for (k, v) in spec {
        match v {
            Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    out.push_str(&format!("#@ {k} = {}\n", plain(item)));
                }
            }
            other => out.push_str(&format!("#@ {k} = {}\n", plain(other))),
        }
    }
    out
}

fn plain(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    let s = plain(v);
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

pub fn csv(spec: &Map<String, Value>, table: &Table) -> String {
    let mut out = header(spec);
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render(artifact: &Artifact, spec: &Map<String, Value>, format: Format) -> String {
    if let Some(body) = &artifact.body {
        return format!("{}{body}", header(spec));
    }
    match format {
        Format::Json => {
            let mut doc = artifact.summary.clone();
            if let Some(t) = &artifact.table {
                doc.insert(t.key.to_string(), t.row_objects());
            }
            doc.insert("version".into(), evograph::VERSION.into());
            doc.insert("spec".into(), Value::Object(spec.clone()));
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values always serialize");
            s.push('\n');
            s
        }
        Format::Csv => match &artifact.table {
            Some(t) => csv(spec, t),
            None => {
                let (columns, row): (Vec<String>, Vec<Value>) = artifact.scalar_summary().into_iter().unzip();
                let t = Table {
                    key: "rows",
                    columns,
                    rows: vec![row],
                };
                csv(spec, &t)
            }
        },
    }
}

pub fn write_to(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let result = match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush())
        }
    };
    result.map_err(|e| {
        let target = path.map_or("stdout".to_string(), |p| p.display().to_string());
        CliError::runtime(format!("cannot write {target}: {e}"))
    })
}
