//! Command-line surface. Exit codes: 0 success, 2 invalid input, 3 solver
//! did not converge (the result is still written), 4 suite failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{
    energy_result, envelope_result, export_cells_from_result, green_result, parse_instance, poisson_result,
    solve_result, ResultFile,
};
use crate::harness::{run_suite_dims, GenConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_SUITE_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nama", version, about = "Exact non-Archimedean Monge-Ampere solver and property checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FileArgs {
    /// Input file.
    pub input: PathBuf,
    /// Output file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Leave the timestamp out so that output is byte-reproducible.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DimArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    /// Alternate between dimensions 1 and 2.
    Mixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a toric Dirac problem.
    Solve(FileArgs),
    /// Psh envelope of a toric constraint set.
    Envelope(FileArgs),
    /// Green function on a metric graph.
    Green(FileArgs),
    /// Poisson equation on a metric graph.
    Poisson(FileArgs),
    /// Energy of a toric envelope or of a curve Poisson solution.
    Energy(FileArgs),
    /// CSV of the Laguerre cells of a toric result file.
    ExportCells(FileArgs),
    /// Run a property suite.
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, value_enum, default_value = "2")]
        dim: DimArg,
        #[arg(long)]
        polytope_complexity: Option<usize>,
        #[arg(long)]
        function_complexity: Option<usize>,
        #[arg(long)]
        coefficient_bound: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_timestamp: bool,
    },
}

struct Failed(i32, String);

impl<E: std::fmt::Display> From<E> for Failed {
    fn from(e: E) -> Self {
        Failed(EXIT_INVALID, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failed> {
    std::fs::read_to_string(path).map_err(|e| Failed(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failed> {
    std::fs::write(path, text).map_err(|e| Failed(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn stamp(mut r: ResultFile, no_timestamp: bool) -> ResultFile {
    if !no_timestamp {
        r.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    r
}

fn run(cmd: Command, err: &mut dyn Write) -> Result<i32, Failed> {
    let (args, result) = match cmd {
        Command::Solve(a) => {
            let inst = parse_instance(&read(&a.input)?)?;
            let (r, converged) = solve_result(&inst)?;
            write(&a.output, &stamp(r, a.no_timestamp).to_json())?;
            if !converged {
                let _ = writeln!(err, "solver did not converge; partial result written");
                return Ok(EXIT_NOT_CONVERGED);
            }
            return Ok(EXIT_OK);
        }
        Command::Envelope(a) => {
            let inst = parse_instance(&read(&a.input)?)?;
            let r = envelope_result(&inst)?;
            (a, r)
        }
        Command::Green(a) => {
            let inst = parse_instance(&read(&a.input)?)?;
            let r = green_result(&inst)?;
            (a, r)
        }
        Command::Poisson(a) => {
            let inst = parse_instance(&read(&a.input)?)?;
            let r = poisson_result(&inst)?;
            (a, r)
        }
        Command::Energy(a) => {
            let inst = parse_instance(&read(&a.input)?)?;
            let r = energy_result(&inst)?;
            (a, r)
        }
        Command::ExportCells(a) => {
            let r = ResultFile::parse(&read(&a.input)?)?;
            write(&a.output, &export_cells_from_result(&r)?)?;
            return Ok(EXIT_OK);
        }
        Command::Check {
            suite,
            seed,
            cases,
            dim,
            polytope_complexity,
            function_complexity,
            coefficient_bound,
            output,
            no_timestamp,
        } => {
            let mut cfg = GenConfig::new(seed, 2);
            if let Some(v) = polytope_complexity {
                cfg.polytope_complexity = v;
            }
            if let Some(v) = function_complexity {
                cfg.function_complexity = v;
            }
            if let Some(v) = coefficient_bound {
                cfg.coefficient_bound = v;
            }
            let dims: &[usize] = match dim {
                DimArg::One => &[1],
                DimArg::Two => &[2],
                DimArg::Mixed => &[1, 2],
            };
            let mut report = run_suite_dims(&suite, &cfg, cases, dims)?;
            if no_timestamp {
                report.elapsed_ms = 0;
            }
            if let Some(path) = output {
                write(&path, &report.to_json())?;
            }
            for f in &report.failures {
                let _ = writeln!(err, "seed {}: {} violated", f.seed, f.assertion);
            }
            return Ok(if report.passed() { EXIT_OK } else { EXIT_SUITE_FAILED });
        }
    };
    write(&args.output, &stamp(result, args.no_timestamp).to_json())?;
    Ok(EXIT_OK)
}

/// Runs one command; diagnostics go to `err`.
pub fn execute(cmd: Command, err: &mut dyn Write) -> i32 {
    match run(cmd, err) {
        Ok(code) => code,
        Err(Failed(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

/// Parses `args` (program name first) and runs the command. Usage errors
/// exit with 2.
pub fn main_with_args<I, T>(args: I, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = write!(err, "{e}");
            code
        }
    }
}
