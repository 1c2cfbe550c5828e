//! `effpac`: command-line front end for effective concept classes.
//!
//! Every run prints a versioned JSON report (or a CSV table with
//! `--format csv`). Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | other failure |
//! | 2 | usage error (bad flag or flag value, missing seed) |
//! | 3 | schema or I/O error (unreadable or invalid input file) |
//! | 4 | membership undecided at the working precision |
//! | 5 | no consistent hypothesis in the class prefix |
//! | 6 | hyperplane approximation failed |
//! | 7 | precision exhausted for a source without a finite description |

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, ValueEnum};
use effpac::Error;

use commands::Command;
use report::{RunReport, REPORT_SCHEMA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "effpac", version, about = "Effective concept classes: VC dimension, PAC trials, constructions")]
#[command(args_override_self = true)]
struct Cli {
    /// JSON object of flag values; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock duration in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::Parse(_) | Error::InvalidArgument(_) | Error::Domain(_) => 2,
            Error::Schema(_) => 3,
            Error::UndecidedMembership { .. } => 4,
            Error::NoConsistentHypothesis { .. } => 5,
            Error::Approximation { .. } => 6,
            Error::Precision { .. } => 7,
            Error::NotEffective(_) | Error::HorizonExceeded { .. } => 1,
        };
    }
    if err.chain().any(|c| c.is::<std::io::Error>() || c.is::<serde_json::Error>()) {
        return 3;
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            anyhow::bail!(Error::InvalidArgument("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let start = Instant::now();
    let outcome = cli.command.run()?;
    let bytes = match cli.format {
        Format::Csv => report::render_csv(&outcome.table)?,
        Format::Json => report::render_json(&RunReport {
            schema: REPORT_SCHEMA.into(),
            command: cli.command.name().into(),
            config: cli.command.config()?,
            result: outcome.result,
            duration_ms: cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        })?,
    };
    report::emit(&bytes, cli.out.as_deref())
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(if e.chain().any(|c| c.is::<std::io::Error>()) { 3 } else { 2 });
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
