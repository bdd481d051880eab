//! Command-line front end: point evaluation, solving, oracle surfaces,
//! experiment sweeps, Monte-Carlo validation and codebook checks, all
//! emitting comma-separated tables with a commented metadata header.
//!
//! Exit status: 0 success, 2 infeasible problem, 64 usage error,
//! 70 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod scenario;
mod table;

use scenario::SpecBuilder;

#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation or spec; exit 64.
    Usage(String),
    /// Unexpected failure inside the tool; exit 70.
    Internal(String),
}

impl From<pld_core::Error> for CliError {
    fn from(e: pld_core::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(
    name = "pld",
    version,
    about = "Finite-blocklength deception metrics: evaluate, optimize, sweep, simulate"
)]
struct Cli {
    /// Scenario spec file (flat `key = value` lines with dotted keys).
    #[arg(long, global = true, value_name = "PATH")]
    spec: Option<PathBuf>,

    /// Output table path; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Override one spec key, e.g. --override link.power_mw=7 (repeatable).
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Shorthand for --override sim.seed=<N>.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Shorthand for --override sim.trials=<N>.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the metric profile of one scenario point.
    Eval,
    /// Optimize the two blocklengths and write the result plus a trace table.
    Solve,
    /// Exhaustively evaluate the integer surface over the search box.
    Oracle,
    /// Sweep one or two parameters, optimizing and running the baseline per point.
    Sweep,
    /// Compare analytic metrics against seeded Monte-Carlo outcome counts.
    Simulate,
    /// Check the cipher codebook requirements and generate a litter set.
    ValidateCodebook,
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let mut builder = SpecBuilder::new();
    if let Some(path) = &cli.spec {
        let body = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read spec {}: {e}", path.display())))?;
        builder.parse_file(&body)?;
    }
    for assignment in &cli.overrides {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--override expects KEY=VALUE, got {assignment:?}"
            )));
        };
        builder.set(key, value)?;
    }
    if let Some(seed) = cli.seed {
        builder.set("sim.seed", &seed.to_string())?;
    }
    if let Some(trials) = cli.trials {
        builder.set("sim.trials", &trials.to_string())?;
    }
    let spec = builder.finish()?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Eval => commands::cmd_eval(&spec, out),
        Command::Solve => commands::cmd_solve(&spec, out),
        Command::Oracle => commands::cmd_oracle(&spec, out),
        Command::Sweep => commands::cmd_sweep(&spec, out),
        Command::Simulate => commands::cmd_simulate(&spec, out),
        Command::ValidateCodebook => commands::cmd_validate_codebook(&spec, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("pld: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("pld: internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
