//! Command-line front end for the `hessq` verifiers.
//!
//! [`main_with_args`] parses arguments, runs one command and writes a single
//! report. Exit codes: 0 when every contract of the run holds, 1 on a
//! contract violation (the report names the witness), 2 on invalid
//! configuration, 3 on I/O failure.

pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;
use std::path::Path;

use clap::Parser;
use hessq::concavity::{analytic_tensor, TensorSource};
use hessq::fields::io;
use hessq::{LabError, ScalarField64};
use thiserror::Error;

pub use config::{Cli, Command, ExperimentConfig};
pub use report::{Format, Report};

pub const TOOL_LINE: &str = concat!("hessq-lab v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o failure: {0}")]
    Io(String),
    /// A numerical routine failed, so the contract could not be established.
    #[error("{0}")]
    Numeric(LabError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 1,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Domain(m) | LabError::Unsupported(m) | LabError::Precondition(m) => CliError::Config(m),
            other => CliError::Numeric(other),
        }
    }
}

/// Replaceable internals, for exercising the failure paths.
pub struct Hooks<'a> {
    pub tensor: TensorSource<'a, f64>,
}

impl Default for Hooks<'_> {
    fn default() -> Self {
        Hooks { tensor: &analytic_tensor::<f64> }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    run_with(config, &Hooks::default())
}

pub fn run_with(config: &ExperimentConfig, hooks: &Hooks<'_>) -> Result<Outcome, CliError> {
    config.validate()?;
    let mut out = commands::dispatch(config, hooks)?;
    let mut header = config.echo();
    header.append(&mut out.report.header);
    out.report.header = header;
    out.report.result("status", if out.passed { "pass" } else { "fail" });
    Ok(out)
}

pub fn read_field(path: &Path) -> Result<ScalarField64, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let reader = std::io::BufReader::new(file);
    let parsed = if is_csv(path) { io::read_csv(reader) } else { io::read_binary(reader) };
    parsed.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_field(path: &Path, field: &ScalarField64) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    if is_csv(path) { io::write_csv(field, &mut w) } else { io::write_binary(field, &mut w) }.map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn now_unix() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Parses, runs and writes; returns the process exit code.
pub fn main_with_args<I, S>(args: I, hooks: &Hooks<'_>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    let outcome = ExperimentConfig::from_cli(cli).and_then(|cfg| {
        let out = run_with(&cfg, hooks)?;
        let text = out.report.render(cfg.format, Some(now_unix()));
        match &cfg.output {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
        }
        Ok(out)
    });
    match outcome {
        Ok(out) => {
            if !out.passed {
                let witness = out.report.get("witness").map(|w| w.to_string()).unwrap_or_default();
                let _ = writeln!(stderr, "hessq-lab: contract violated: {witness}");
            }
            out.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "hessq-lab: {e}");
            e.exit_code()
        }
    }
}
