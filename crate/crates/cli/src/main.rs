use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{CliError, Flags, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "entcap", version, about = "Entanglement-assisted capacity witnesses, bounds and simulations")]
struct Cli {
    /// JSON config file with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ΔS witness over a state-family grid (CSV by default).
    WitnessSweep(Flags),
    /// Minimum output entropy, analytic and numeric.
    Smin(Flags),
    /// ε, δ and the capacity bounds for a channel pair and probe state.
    Discriminate(Flags),
    /// Bound arithmetic for given ε and δ.
    CapacityBounds(Flags),
    /// Monte Carlo run of the feedback protocol, assisted vs unassisted.
    Simulate(Flags),
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    /// Output was written but some numeric step did not converge.
    Advisory(String),
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let (flags, which) = match cli.command {
        Command::WitnessSweep(f) => (f, commands::witness_sweep as fn(&RunConfig) -> Result<Status, CliError>),
        Command::Smin(f) => (f, commands::smin as _),
        Command::Discriminate(f) => (f, commands::discriminate as _),
        Command::CapacityBounds(f) => (f, commands::capacity_bounds as _),
        Command::Simulate(f) => (f, commands::simulate as _),
    };
    let cfg = RunConfig::resolve(flags, cli.config.as_ref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| which(&cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Advisory(msg)) => {
            eprintln!("advisory: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
