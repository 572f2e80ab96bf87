//! `clockforge` command-line driver.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{read_config, Cli, Format, Params};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {flag}: {msg}")]
    Usage { flag: String, msg: String },
    #[error(transparent)]
    Core(#[from] clockforge::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn usage(flag: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Usage {
            flag: flag.to_string(),
            msg: msg.to_string(),
        }
    }
}

/// Exit code 0 when every claim holds, 1 when one fails.
fn run(cli: Cli) -> Result<bool, CliError> {
    let from_file = match &cli.config {
        Some(path) => Some(read_config(path)?),
        None => None,
    };
    let (kind, params) = match (cli.command, from_file) {
        (Some(cmd), file) => {
            let (kind, flags) = cmd.split();
            match file {
                Some((Some(k), _)) if k != kind => {
                    return Err(CliError::usage(
                        "--config",
                        format!("file is for {}, not {}", k.name(), kind.name()),
                    ))
                }
                Some((_, defaults)) => (kind, flags.or(defaults)),
                None => (kind, flags),
            }
        }
        (None, Some((Some(kind), p))) => (kind, p),
        (None, Some((None, _))) => {
            return Err(CliError::usage(
                "--config",
                "no \"command\" in file and none on the command line",
            ))
        }
        (None, None) => return Err(CliError::usage("command", "missing; see --help")),
    };
    let outcome = commands::run(kind, &params)?;
    emit(&outcome, kind.name(), &params)?;
    for c in &outcome.claims {
        eprintln!(
            "{} {}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.claim,
            c.detail
        );
    }
    Ok(outcome.passed())
}

fn emit(o: &output::Outcome, command: &str, p: &Params) -> Result<(), CliError> {
    let text = match p.format() {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&o.envelope(command))
                .map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => match &o.table {
            Some(t) => t.to_csv()?,
            None => {
                return Err(CliError::usage(
                    "--format",
                    format!("{command} has no tabular output"),
                ))
            }
        },
    };
    match &p.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
