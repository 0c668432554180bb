//! Command-line front end: experiments, solving from sample files, cubature
//! rules and the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 missing input file,
//! 3 invalid input (flags, config, CSV), 4 numerical or output failure.
//! `SPHERE_REG_THREADS` caps the worker thread count.

pub mod commands;
pub mod config;
pub mod error;
pub mod files;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sphreg::selection::ParameterGrid;
use sphreg::verify::VerifyOptions;
use sphreg::{PenaltyRule, SymbolPreset};

use crate::commands::{cmd_experiment, cmd_rule, cmd_solve, cmd_verify, verify_table, SolveParameters, SolveRequest};
use crate::error::{exit, CliError, CliResult};

pub const THREADS_VAR: &str = "SPHERE_REG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sphreg", version, about = "Two-step regularization on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a synthetic experiment described by a config file.
    Experiment {
        config: PathBuf,
        /// Base directory for relative output paths.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Solve from a sample file on the canonical rule and write coefficients.
    Solve(SolveArgs),
    /// Write the cubature rule as CSV `x,y,z,weight`.
    #[command(allow_negative_numbers = true)]
    Rule {
        #[arg(long = "M", visible_alias = "max-degree")]
        max_degree: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Run the embedded invariant checks.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SolveArgs {
    /// Sample CSV `x,y,z,value`.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long = "M", visible_alias = "max-degree")]
    max_degree: usize,
    /// Radius of the data sphere.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Radius of the solution sphere.
    #[arg(long = "R", visible_alias = "radius", default_value_t = 1.0)]
    radius: f64,
    /// `sst`, `sgg`, `geometric:<q>` or `polynomial:<s>`.
    #[arg(long)]
    symbol: SymbolPreset,
    /// `constant:<c>`, `linear`, `inverse-symbol` or `inverse-symbol:<s>`.
    #[arg(long, default_value = "inverse-symbol")]
    penalty: PenaltyRule,
    #[arg(long, required_unless_present = "auto")]
    lambda: Option<f64>,
    #[arg(long, required_unless_present = "auto")]
    alpha: Option<f64>,
    /// Choose both parameters by quasi-optimality on geometric grids.
    #[arg(long, conflicts_with_all = ["lambda", "alpha"])]
    auto: bool,
    #[arg(long, default_value_t = ParameterGrid::standard().base())]
    grid_base: f64,
    #[arg(long, default_value_t = ParameterGrid::standard().factor())]
    grid_factor: f64,
    #[arg(long, default_value_t = ParameterGrid::standard().count())]
    grid_count: usize,
    /// Omit the zero value from the grids.
    #[arg(long)]
    no_grid_zero: bool,
    /// With `--auto`, write the outer search trace as CSV.
    #[arg(long, requires = "auto")]
    trace: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
}

fn configure_threads() -> CliResult<()> {
    let Some(raw) = std::env::var_os(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::invalid(format!("{THREADS_VAR} must be a positive integer")))?;
    // A pool may already exist when called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    let io = |e: std::io::Error| CliError::numerical(format!("cannot write to stdout: {e}"));
    match cli.command {
        Command::Experiment { config, out_dir } => {
            let report = cmd_experiment(&config, out_dir.as_deref())?;
            write!(out, "{}", report.describe()).map_err(io)?;
        }
        Command::Solve(a) => {
            if !(a.rho.is_finite() && a.rho > 0.0 && a.radius.is_finite() && a.radius > 0.0) {
                return Err(CliError::invalid("--rho and --R must be positive"));
            }
            let parameters = if a.auto {
                let grid = ParameterGrid::new(a.grid_base, a.grid_factor, a.grid_count, !a.no_grid_zero)
                    .map_err(|e| CliError::invalid(format!("grid: {e}")))?;
                SolveParameters::Auto {
                    alpha_grid: grid,
                    lambda_grid: grid,
                    trace: a.trace,
                }
            } else {
                SolveParameters::Fixed {
                    alpha: a.alpha.unwrap_or_default(),
                    lambda: a.lambda.unwrap_or_default(),
                }
            };
            let report = cmd_solve(&SolveRequest {
                samples: a.samples,
                max_degree: a.max_degree,
                data_radius: a.rho,
                solution_radius: a.radius,
                symbol: a.symbol,
                penalty: a.penalty,
                parameters,
                output: a.output.clone(),
            })?;
            if a.auto {
                writeln!(out, "alpha = {}", sphreg::format::decimal(report.alpha)).map_err(io)?;
                writeln!(out, "lambda = {}", sphreg::format::decimal(report.lambda)).map_err(io)?;
            }
            writeln!(out, "coefficients written to {}", a.output.display()).map_err(io)?;
        }
        Command::Rule { max_degree, rho, output } => {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(CliError::invalid(format!("--rho must be positive, got {rho}")));
            }
            let n = cmd_rule(max_degree, rho, &output)?;
            writeln!(out, "{n} points written to {}", output.display()).map_err(io)?;
        }
        Command::Verify { quick, inject_fault } => {
            let outcomes = cmd_verify(VerifyOptions { quick, inject_fault });
            write!(out, "{}", verify_table(&outcomes)).map_err(io)?;
            let failed: Vec<&str> = outcomes.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if !failed.is_empty() {
                return Err(CliError::new(
                    exit::VERIFY_FAILED,
                    format!("verification failed: {}", failed.join(", ")),
                ));
            }
        }
    }
    Ok(exit::OK)
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to stderr as a single `error:` line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return exit::OK;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprintln!("{}", CliError::invalid("missing subcommand; see `sphreg --help`"));
                return exit::INVALID_INPUT;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error:")
                .trim();
            eprintln!("{}", CliError::invalid(first));
            return exit::INVALID_INPUT;
        }
    };
    let result = configure_threads().and_then(|()| dispatch(cli, &mut std::io::stdout().lock()));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.code
        }
    }
}
