use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slp_cli::config::RunConfig;
use slp_cli::error::CliError;
use slp_cli::output::{Format, Table};
use slp_cli::commands;

/// Spectral Legendre-Galerkin eigenvalues for Sturm-Liouville problems with
/// a singular potential at x = -1.
#[derive(Parser)]
#[command(name = "slp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Problem definition (TOML with [problem] and [run] sections).
    #[arg(long)]
    config: PathBuf,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Endpoint class, correction algorithm and predicted order.
    Classify(Common),
    /// Lowest eigenvalues with corrections.
    Solve(Common),
    /// Differences and empirical orders over an N -> 2N+1 list.
    Converge(Common),
    /// Quadrature, reference-spectrum and ratio checks.
    Validate(Common),
}

fn emit(common: &Common, build: impl FnOnce(&RunConfig) -> Result<Table, CliError>) -> Result<(), CliError> {
    let config = RunConfig::load(&common.config)?;
    build(&config)?.write(common.format, common.out.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Classify(c) => emit(c, commands::classify),
        Command::Solve(c) => emit(c, commands::solve),
        Command::Converge(c) => {
            let threads = commands::thread_count()?;
            emit(c, |config| commands::converge(config, threads))
        }
        Command::Validate(c) => {
            let mut failed = 0;
            emit(c, |config| {
                let (table, f) = commands::validate(config)?;
                failed = f;
                Ok(table)
            })?;
            if failed > 0 {
                Err(CliError::Validation(failed))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
