//! `cubeavg`: experiment runner writing JSON or CSV reports.
//!
//! Exit status 0 on success, 1 when a check fails, 2 on input errors.

mod commands;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Command;
use report::Format;

#[derive(Parser, Debug)]
#[command(name = "cubeavg", version, about = "Cubic ergodic averages and cube counting on finite models")]
struct Cli {
    /// Report file; standard output when neither this nor an output directory is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Directory for reports named `<command>-seed<seed>.<ext>`.
    #[arg(long, global = true, env = "CUBEAVG_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for random systems, observables and windows.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(cubeavg_core::Error),
    Io(String),
    Internal(String),
}

impl From<cubeavg_core::Error> for CliError {
    fn from(e: cubeavg_core::Error) -> CliError {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Io(m) | CliError::Internal(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(cubeavg_core::Error::CheckFailed(_)) => 1,
            _ => 2,
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    let name = cli.command.name();
    let outcome = cli.command.run(cli.seed)?;
    let mut config = report::to_value(&cli.command)?;
    if let Some(map) = config.as_object_mut() {
        map.insert("format".into(), report::to_value(cli.format)?);
    }
    let doc = report::envelope(name, cli.seed, config, &outcome);
    let bytes = report::render(&doc, cli.format)?;
    let path = report::destination(cli.output.as_deref(), cli.output_dir.as_deref(), name, cli.seed, cli.format);
    report::write(&bytes, path.as_deref())?;
    if let (Some(p), Some(passed)) = (&path, outcome.passed) {
        eprintln!("{name}: {} ({})", if passed { "passed" } else { "FAILED" }, p.display());
    }
    Ok(outcome.passed.unwrap_or(true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
