use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use carbonbound::config::{Overrides, PipelineConfig};
use carbonbound::pipeline::{self, ShiftMode};

/// Conformal confidence intervals for grid carbon-intensity forecasts and
/// uncertainty-aware load-shifting simulation.
#[derive(Parser)]
#[command(name = "carbonbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline configuration file.
    #[arg(long, global = true, default_value = "pipeline.toml")]
    config: PathBuf,
    /// Workspace directory, overriding the config and the
    /// CARBONBOUND_WORKSPACE environment variable.
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,
    /// Restrict the run to one or more configured regions.
    #[arg(long, global = true)]
    region: Vec<String>,
    /// Significance levels, replacing the configured list.
    #[arg(long, global = true)]
    alpha: Vec<f64>,
    /// Shift policy: point, dominance, or overlap:THETA.
    #[arg(long, global = true)]
    policy: Option<String>,
    /// Seed for everything random, replacing the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize the configured inputs into the workspace.
    Ingest,
    /// Generate baseline forecast batches plus accuracy reports.
    Forecast,
    /// Produce interval files plus coverage and width reports.
    Run,
    /// Replay the suspend-and-resume case studies.
    Shift {
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Re-derive evaluation tables from stored artifacts.
    Report,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Temporal,
    Spatial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        workspace: cli.workspace.clone(),
        regions: cli.region.clone(),
        alphas: cli.alpha.clone(),
        policy: cli.policy.clone(),
        seed: cli.seed,
    };

    let config = match PipelineConfig::load(&cli.config, &overrides) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };

    let outcome = match cli.command {
        Command::Ingest => pipeline::cmd_ingest(&config),
        Command::Forecast => pipeline::cmd_forecast(&config),
        Command::Run => pipeline::cmd_run(&config),
        Command::Shift { mode } => pipeline::cmd_shift(
            &config,
            match mode {
                Mode::Temporal => ShiftMode::Temporal,
                Mode::Spatial => ShiftMode::Spatial,
            },
        ),
        Command::Report => pipeline::cmd_report(&config),
    };

    match outcome {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("error: {error}");
            let mut cause = std::error::Error::source(&error);
            while let Some(inner) = cause {
                eprintln!("  caused by: {inner}");
                cause = inner.source();
            }
            ExitCode::FAILURE
        }
    }
}
