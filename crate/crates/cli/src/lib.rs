//! Command-line front end for `optoent-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use crate::args::{Cli, Command};
use crate::commands::{execute, Report};
use crate::config::{Format, RunConfig};
use crate::error::{status, CliResult};
use crate::output::{format_float, write_json};

pub use crate::config::ENV_QUAD_TOL;

pub fn resolve(command: &Command) -> CliResult<(RunConfig, bool)> {
    match command {
        Command::Entangle(a) => config::resolve_entangle(a),
        Command::Sweep(a) => config::resolve_sweep(a),
        Command::Optimize(a) => config::resolve_optimize(a),
        Command::Spectra(a) => config::resolve_spectra(a),
        Command::Validate(a) => config::resolve_validate(a),
    }
}

fn record_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => n.as_f64().map(format_float).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(record_cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

pub fn render(report: &Report, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    let io = match (report, format) {
        (Report::Table(t), Format::Csv) => t.write_csv(&mut buf),
        (Report::Table(t), Format::Json) => write_json(&mut buf, &t.to_json()),
        (Report::Record(m), Format::Json) => write_json(&mut buf, &Value::Object(m.clone())),
        (Report::Record(m), Format::Csv) => {
            let keys: Vec<&str> = m.keys().map(String::as_str).collect();
            let cells: Vec<String> = m.values().map(record_cell).collect();
            writeln!(buf, "{}\n{}", keys.join(","), cells.join(","))
        }
    };
    io.expect("writing to memory");
    buf
}

fn run_command(command: &Command, out: &mut dyn Write) -> CliResult<()> {
    let (cfg, print_config) = resolve(command)?;
    if print_config {
        out.write_all(cfg.to_file_string().as_bytes())?;
        return Ok(());
    }
    let outcome = execute(&cfg)?;
    let bytes = render(&outcome.report, cfg.format);
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => out.write_all(&bytes)?,
    }
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if shown { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if shown { status::OK } else { status::CONFIG };
        }
    };
    match run_command(&cli.command, out) {
        Ok(()) => status::OK,
        Err(e) => {
            let _ = writeln!(err, "optoent: {e}");
            e.status()
        }
    }
}
