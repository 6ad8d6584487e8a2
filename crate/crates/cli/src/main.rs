//! `painleve`: batch front end for the verification engine.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or an
//! integration stops at a singularity, 2 on invalid input.

mod commands;
mod config;
mod error;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use painleve_core::numerics::FloatFormat;

use config::{MethodName, OutputFormat};
use error::{exit, CliError};
use verify::Suite;

#[derive(Parser, Debug)]
#[command(name = "painleve", version, about = "Exact and numerical checks for coupled Painleve systems")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Output format of reports and trajectories.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Seed for sampled identity checks and random parameter draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Evaluate independent checks on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run symbolic verification suites; exit 1 if any check fails.
    Verify {
        system: String,
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Integrate one time flow and write the trajectory with diagnostics.
    Integrate(IntegrateArgs),
    /// Apply a word in the generators to an expression or an exact state.
    Apply {
        system: String,
        /// Generators separated by spaces, leftmost acting first on points.
        word: String,
        /// Expression in the system's variables, e.g. `x + y^2`.
        expr: Option<String>,
        /// Exact point as `name=value` pairs covering variables, time and parameters.
        #[arg(long)]
        state: Option<String>,
        /// Print the parameter action and translation offset.
        #[arg(long)]
        params: bool,
    },
    /// Solve the holomorphy ansatz at one parameter sample.
    Ansatz {
        system: String,
        /// All parameters or only the free ones, e.g. `1/3,1/5`.
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
        /// Degree bound in the time variable.
        #[arg(long)]
        t_degree: Option<u32>,
    },
    /// Dump the system catalog: Hamiltonians, divisors, generators and charts.
    Export { system: String },
}

#[derive(Args, Debug, Clone)]
pub struct IntegrateArgs {
    /// System id; may come from the config file instead.
    system: Option<String>,
    /// Time variable of the flow (defaults to the first one).
    #[arg(long)]
    time: Option<String>,
    /// Initial state, comma separated in variable order.
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
    /// All parameters or only the free ones, as rationals.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// Start and end of the time span, e.g. `0,1`.
    #[arg(long, allow_hyphen_values = true)]
    span: Option<String>,
    /// Integrator; adaptive rk45 unless set.
    #[arg(long, value_enum)]
    method: Option<MethodName>,
    /// Fixed step for rk4.
    #[arg(long)]
    step: Option<f64>,
    /// Absolute error tolerance for rk45.
    #[arg(long)]
    atol: Option<f64>,
    /// Relative error tolerance for rk45.
    #[arg(long)]
    rtol: Option<f64>,
    /// Abort when a compiled denominator drops below this magnitude.
    #[arg(long)]
    guard: Option<f64>,
    /// Float encoding in the output file.
    #[arg(long, value_parser = parse_float_format)]
    float_format: Option<FloatFormat>,
}

fn parse_float_format(s: &str) -> Result<FloatFormat, String> {
    s.parse().map_err(|e: painleve_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command, &cli.global) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Core(
                    painleve_core::Error::StepUnderflow { .. } | painleve_core::Error::GuardTriggered(_),
                ) => exit::FAILED,
                _ => exit::INVALID,
            })
        }
    }
}
