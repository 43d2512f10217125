//! Command-line driver for the heat-sink topology optimization solver.

mod config_file;
mod output;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use topopt::SolverConfig;

#[derive(Parser)]
#[command(
    name = "topopt",
    about = "ADMM topology optimization of a heat sink",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (key=value lines).
    config: PathBuf,
    /// Override the RNG seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single optimization.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one optimization per initial penalty value (stopping rule
    /// ||w - v||^2 <= 1) and tabulate iteration counts.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated list of initial penalties.
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
    },
}

fn load(common: &CommonArgs) -> Result<SolverConfig> {
    let mut config = config_file::load_config(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.display().to_string();
    }
    config.validate()?;
    Ok(config)
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { common } => {
            let config = load(&common)?;
            let run = runs::run_single(&config).context("solve failed")?;
            println!(
                "{} after {} iterations: residual {:.3e}, objective {:.6e}, rho {:.3e} -> {:.3e}",
                if run.converged {
                    "converged"
                } else {
                    "stopped"
                },
                run.state.iteration,
                run.state.residual_sq(),
                run.history
                    .last()
                    .map_or(f64::NAN, |r| r.original_objective),
                config.rho0,
                run.state.rho,
            );
            println!("artifacts in {}", config.output_dir);
            Ok(())
        }
        Command::Sweep { common, rho } => {
            let config = load(&common)?;
            let rows = runs::run_rho_sweep(&config, &rho).context("sweep failed")?;
            for row in &rows {
                println!(
                    "rho0 {:.3e}: {} in {} iterations (rho ratio {:.1})",
                    row.rho0,
                    if row.failed {
                        "failed"
                    } else if row.converged {
                        "converged"
                    } else {
                        "hit max_outer"
                    },
                    row.iterations,
                    row.rho_ratio,
                );
            }
            println!("sweep table in {}/sweep.csv", config.output_dir);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
