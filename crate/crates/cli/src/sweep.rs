use std::ffi::OsString;

use clap::Parser;
use evograph::rng::derive_seed;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::args::{Cli, SweepArgs};
use crate::error::CliError;
use crate::output::{Artifact, Table};

/// Keys a cell may not set: outputs, global plumbing and the per-cell seed.
const RESERVED: [&str; 8] = [
    "out",
    "trajectory",
    "states",
    "threads",
    "config",
    "seed",
    "format",
    "command",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<String>,
}

fn key_value(s: &str, what: &str) -> Result<(String, String), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("--{what} `{s}` is not of the form key=value")))?;
    let key = k.trim().replace('_', "-");
    if key.is_empty() {
        return Err(CliError::usage(format!("--{what} `{s}` has an empty key")));
    }
    if RESERVED.contains(&key.as_str()) {
        return Err(CliError::usage(format!("`{key}` cannot be set per sweep cell")));
    }
    Ok((key, v.trim().to_string()))
}

pub fn parse_axes(specs: &[String]) -> Result<Vec<Axis>, CliError> {
    let mut axes: Vec<Axis> = Vec::new();
    for s in specs {
        let (name, list) = key_value(s, "axis")?;
        let values: Vec<String> = list
            .split(',')
            .map(|v| v.trim())
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect();
        if values.is_empty() {
            return Err(CliError::usage(format!("axis `{name}` has no values")));
        }
        if axes.iter().any(|a| a.name == name) {
            return Err(CliError::usage(format!("axis `{name}` given twice")));
        }
        axes.push(Axis { name, values });
    }
    if axes.is_empty() {
        return Err(CliError::usage("a sweep needs at least one --axis"));
    }
    Ok(axes)
}

/// Cells in row-major order: the last axis varies fastest.
pub fn cells(axes: &[Axis]) -> Vec<Vec<&str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut cell = prefix.clone();
                    cell.push(v.as_str());
                    cell
                })
            })
            .collect();
    }
    out
}

fn push_flag(argv: &mut Vec<OsString>, key: &str, value: &str) {
    match value {
        "true" => argv.push(format!("--{key}").into()),
        "false" => {}
        _ => {
            argv.push(format!("--{key}").into());
            argv.push(value.into());
        }
    }
}

/// Axis values keep their JSON type when they parse as numbers.
fn typed(v: &str) -> Value {
    if let Ok(i) = v.parse::<i64>() {
        return i.into();
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => x.into(),
        _ => v.into(),
    }
}

fn cell_row(artifact: &Artifact) -> Result<Vec<(String, Value)>, CliError> {
    match &artifact.table {
        None => Ok(artifact.scalar_summary()),
        Some(t) if t.rows.len() == 1 => Ok(t.columns.iter().cloned().zip(t.rows[0].iter().cloned()).collect()),
        Some(t) => Err(CliError::usage(format!(
            "a sweep cell produced {} rows; give list-valued options as an axis instead",
            t.rows.len()
        ))),
    }
}

pub fn sweep(args: &SweepArgs, seed: u64) -> Result<Artifact, CliError> {
    let axes = parse_axes(&args.axis)?;
    let fixed: Vec<(String, String)> = args.set.iter().map(|s| key_value(s, "set")).collect::<Result<_, _>>()?;
    if let Some((k, _)) = fixed.iter().find(|(k, _)| axes.iter().any(|a| &a.name == k)) {
        return Err(CliError::usage(format!(
            "`{k}` is both fixed with --set and swept with --axis"
        )));
    }
    let grid = cells(&axes);
    let task = args.task.name();
    let results: Vec<Result<(u64, Artifact), CliError>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let cell_seed = derive_seed(seed, i as u64);
            let mut argv: Vec<OsString> = vec![
                "evograph".into(),
                task.into(),
                "--seed".into(),
                cell_seed.to_string().into(),
            ];
            for (k, v) in &fixed {
                push_flag(&mut argv, k, v);
            }
            for (axis, v) in axes.iter().zip(cell) {
                push_flag(&mut argv, &axis.name, v);
            }
            let describe = || {
                let parts: Vec<String> = axes.iter().zip(cell).map(|(a, v)| format!("{}={v}", a.name)).collect();
                parts.join(" ")
            };
            let cli = Cli::try_parse_from(&argv)
                .map_err(|e| CliError::usage(format!("sweep cell {}: {}", describe(), e.to_string().trim_end())))?;
            let artifact = crate::run_command(&cli.command, cell_seed).map_err(|e| CliError {
                code: e.code,
                message: format!("sweep cell {}: {}", describe(), e.message),
            })?;
            Ok((cell_seed, artifact))
        })
        .collect();

    let mut columns: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    columns.push("seed".into());
    let mut rows: Vec<Map<String, Value>> = Vec::with_capacity(grid.len());
    let mut failure = None;
    for (cell, result) in grid.iter().zip(results) {
        let (cell_seed, artifact) = result?;
        let mut row = Map::new();
        for (axis, v) in axes.iter().zip(cell) {
            row.insert(axis.name.clone(), typed(v));
        }
        row.insert("seed".into(), cell_seed.into());
        for (k, v) in cell_row(&artifact)? {
            if !columns.contains(&k) {
                columns.push(k.clone());
            }
            row.entry(k).or_insert(v);
        }
        if failure.is_none() {
            failure = artifact.failure.clone();
        }
        rows.push(row);
    }
    let mut table = Table {
        key: "rows",
        columns,
        rows: Vec::new(),
    };
    table.rows = rows
        .into_iter()
        .map(|mut row| {
            table
                .columns
                .iter()
                .map(|c| row.remove(c).unwrap_or(Value::Null))
                .collect()
        })
        .collect();
    let mut a = Artifact::default();
    a.put("task", task);
    a.put(
        "axes",
        Value::Array(axes.iter().map(|x| Value::from(x.name.clone())).collect()),
    );
    a.put("cells", table.rows.len());
    a.table = Some(table);
    a.failure = failure;
    Ok(a)
}
