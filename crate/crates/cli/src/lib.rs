//! Command-line front end for `evograph`.
//!
//! [`run`] parses arguments (merging a config file when given), executes the
//! command on a private thread pool and writes a self-describing artifact.
//! It returns the process exit status.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::{Map, Value};

use args::{Cli, Command};
use error::{CliError, EXIT_OK, EXIT_USAGE};
use output::Artifact;

pub fn run_command(command: &Command, seed: u64) -> Result<Artifact, CliError> {
    match command {
        Command::Generate(a) => commands::generate(a),
        Command::Moran(a) => commands::moran(a, seed),
        Command::Bounds(a) => commands::bounds(a),
        Command::Aggregate(a) => commands::aggregate(a, seed),
        Command::Control(a) => commands::control(a, seed),
        Command::Sweep(a) => sweep::sweep(a, seed),
    }
}

fn flatten_into<T: Serialize>(spec: &mut Map<String, Value>, args: &T) {
    if let Value::Object(fields) = serde_json::to_value(args).expect("arguments always serialize") {
        spec.extend(fields);
    }
}

/// The resolved run description embedded in every artifact. Output location,
/// thread count and config path are left out: they never change results.
pub fn spec_of(cli: &Cli) -> Map<String, Value> {
    let mut spec = Map::new();
    spec.insert("command".into(), cli.command.name().into());
    spec.insert("seed".into(), cli.seed.into());
    spec.insert("format".into(), serde_json::to_value(cli.format).unwrap());
    match &cli.command {
        Command::Generate(a) => flatten_into(&mut spec, a),
        Command::Moran(a) => flatten_into(&mut spec, a),
        Command::Bounds(a) => flatten_into(&mut spec, a),
        Command::Aggregate(a) => flatten_into(&mut spec, a),
        Command::Control(a) => flatten_into(&mut spec, a),
        Command::Sweep(a) => flatten_into(&mut spec, a),
    }
    spec
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn execute(cli: &Cli) -> Result<Artifact, CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::usage("--threads must be >= 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::runtime(format!("cannot start worker threads: {e}")))?;
    pool.install(|| run_command(&cli.command, cli.seed))
}

fn emit(cli: &Cli, artifact: &Artifact) -> Result<(), CliError> {
    let spec = spec_of(cli);
    for side in &artifact.side_files {
        output::write_to(Some(&side.path), &output::csv(&spec, &side.table))?;
    }
    output::write_to(cli.out.as_deref(), &output::render(artifact, &spec, cli.format))
}

/// Runs the tool and returns its exit status: 0 on success, 2 for usage and
/// precondition errors, 3 for runs that could not finish.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&argv) {
        match config::load(path.as_ref()) {
            Ok(cfg) => argv = config::merge(argv, &cfg),
            Err(e) => {
                eprintln!("error: {e}");
                return e.code;
            }
        }
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = execute(&cli).and_then(|artifact| {
        emit(&cli, &artifact)?;
        artifact.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
