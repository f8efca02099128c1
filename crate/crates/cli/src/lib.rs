//! Command surface of the `mmsot` binary: argument parsing, file I/O,
//! markdown reports and SVG plots around the `mmsot-core` library.
//!
//! Every command writes its artifacts into one output directory (`--out`,
//! defaulting to `$MMSOT_OUT`, then the working directory) and prints a short
//! summary to stdout. Failures map onto disjoint exit codes, see [`CliError`].

mod analyze;
mod report;
mod scenario;
mod solve;
pub mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mmsot_core::rational;
use mmsot_core::Error;
use thiserror::Error as ThisError;

pub use report::{Finding, Report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_UNKNOWN_SCENARIO: u8 = 4;
pub const EXIT_BAD_REFERENCE: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "mmsot", version, about = "Quadratic optimal transport on finite metric measure spaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Output directory for every artifact.
    #[arg(long, global = true, env = "MMSOT_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    pub no_plots: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal coupling between two measures on one space.
    Solve(solve::SolveArgs),
    /// Build a model space and check its expected phenomena.
    Scenario(scenario::ScenarioArgs),
    /// Interval defect over a scale schedule at one point.
    Tangent(analyze::TangentArgs),
    /// Ball-mass ratio curve and polar bins at one point.
    Curvature(analyze::CurvatureArgs),
    /// Exact Gromov-Hausdorff distance between two small spaces.
    Gh(analyze::GhArgs),
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: Error },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 parse, 3 infeasible, 4 unknown scenario, 5 bad point reference, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::File { source: e, .. } => core_exit_code(e),
            CliError::Read { .. } | CliError::Usage(_) => EXIT_PARSE,
            CliError::Write { .. } => EXIT_FAILURE,
        }
    }
}

fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::Json(_)
        | Error::InvalidMetric(_)
        | Error::Structure(_)
        | Error::Disconnected
        | Error::Parameter(_) => EXIT_PARSE,
        Error::MassMismatch { .. } => EXIT_INFEASIBLE,
        Error::UnknownScenario(_) => EXIT_UNKNOWN_SCENARIO,
        Error::UnknownPoint(_) | Error::PointOutOfRange(_) => EXIT_BAD_REFERENCE,
        _ => EXIT_FAILURE,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Output directory plus the list of files written so far.
pub struct Output {
    dir: PathBuf,
    plots: bool,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(global: &GlobalArgs) -> CliResult<Self> {
        fs::create_dir_all(&global.out).map_err(|source| CliError::Write { path: global.out.clone(), source })?;
        Ok(Output { dir: global.out.clone(), plots: !global.no_plots, written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes an SVG unless plots are disabled.
    pub fn plot(&mut self, name: &str, svg: impl FnOnce() -> String) -> CliResult<Option<PathBuf>> {
        if self.plots {
            self.write(name, &svg()).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

/// Attaches the file name to errors raised while interpreting its contents.
pub(crate) fn in_file<T>(path: &Path, r: mmsot_core::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

/// Accepts `p/q` or a decimal.
pub(crate) fn parse_number(s: &str) -> Result<f64, String> {
    if s.contains('/') {
        rational::parse(s).map(|r| rational::to_f64(&r)).map_err(|e| e.to_string())
    } else {
        s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
    }
}

/// Runs one command, printing its summary to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let mut out = Output::new(&cli.global)?;
    let lines = match cli.command {
        Command::Solve(args) => solve::run(&args, &mut out)?,
        Command::Scenario(args) => scenario::run(&args, &mut out)?,
        Command::Tangent(args) => analyze::tangent(&args, &mut out)?,
        Command::Curvature(args) => analyze::curvature(&args, &mut out)?,
        Command::Gh(args) => analyze::gh(&args, &mut out)?,
    };
    let print = |stdout: &mut dyn Write| -> io::Result<()> {
        for line in &lines {
            writeln!(stdout, "{line}")?;
        }
        for path in out.written() {
            writeln!(stdout, "wrote {}", path.display())?;
        }
        Ok(())
    };
    print(stdout).map_err(|source| CliError::Write { path: "<stdout>".into(), source })
}

/// `p/q = decimal` for exact values.
pub(crate) fn exact_and_decimal(x: &rational::Rational) -> String {
    let s = rational::format(x);
    let d = rational::to_f64(x);
    if s.contains('/') {
        format!("{s} = {d:.12}")
    } else {
        s
    }
}
