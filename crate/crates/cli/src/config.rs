//! Config files and earlier artifacts as sources of default flags.
//!
//! Three shapes are accepted:
//!
//! * flat `key = value` lines with `#` comments;
//! * a JSON artifact, read from its `spec` object;
//! * a CSV or edge-list artifact, read from its `#@ key = value` header.
//!
//! Every entry becomes `--key value` appended after the command line, except
//! keys the command line already sets.

use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use crate::args::COMMAND_NAMES;
use crate::error::CliError;
use crate::output::HEADER_PREFIX;

/// Flags that never come from a file.
const LOCAL_ONLY: [&str; 3] = ["config", "out", "threads"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEntries {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

fn flag_name(key: &str) -> String {
    key.trim().replace('_', "-")
}

pub fn load(path: &Path) -> Result<ConfigEntries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<ConfigEntries, String> {
    if text.trim_start().starts_with('{') {
        return parse_json(text);
    }
    let header = text.lines().next().is_some_and(|l| l.starts_with(HEADER_PREFIX));
    let mut out = ConfigEntries {
        command: None,
        entries: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = if header {
            match raw.strip_prefix("#@ ") {
                Some(rest) => rest,
                None => continue,
            }
        } else {
            raw
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        push(&mut out, &flag_name(k), v.trim().to_string());
    }
    Ok(out)
}

fn push(out: &mut ConfigEntries, key: &str, value: String) {
    if key == "command" {
        out.command = Some(value);
    } else if !LOCAL_ONLY.contains(&key) {
        out.entries.push((key.to_string(), value));
    }
}

fn parse_json(text: &str) -> Result<ConfigEntries, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let spec = doc
        .get("spec")
        .and_then(Value::as_object)
        .ok_or("JSON config has no `spec` object")?;
    let mut out = ConfigEntries {
        command: None,
        entries: Vec::new(),
    };
    for (k, v) in spec {
        let key = flag_name(k);
        match v {
            Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    push(&mut out, &key, scalar(item)?);
                }
            }
            other => push(&mut out, &key, scalar(other)?),
        }
    }
    Ok(out)
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(format!("unsupported config value {v}")),
    }
}

fn given(argv: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_value = format!("--{key}=");
    argv.iter()
        .filter_map(|a| a.to_str())
        .any(|a| a == flag || a.starts_with(&with_value))
}

/// `argv` with the config's command inserted after the program name when
/// absent and its entries appended, skipping every flag `argv` already sets.
pub fn merge(argv: Vec<OsString>, cfg: &ConfigEntries) -> Vec<OsString> {
    let has_command = argv
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .any(|a| COMMAND_NAMES.contains(&a));
    let mut out = argv.clone();
    if !has_command {
        if let Some(c) = &cfg.command {
            out.insert(1.min(out.len()), c.into());
        }
    }
    // A graph comes from either a family or a file; the command line's choice
    // displaces the config's.
    let graph_given = given(&argv, "graph");
    let family_given = given(&argv, "family");
    for (key, value) in &cfg.entries {
        if given(&argv, key) {
            continue;
        }
        if graph_given && matches!(key.as_str(), "family" | "n" | "edge-eps") {
            continue;
        }
        if family_given && key == "graph" {
            continue;
        }
        match value.as_str() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    out
}
