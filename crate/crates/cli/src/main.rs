//! `waveqed`: configuration, orchestration and serialisation of the
//! waveguide scattering simulations.

mod commands;
mod config;
mod error;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use error::CliError;
use output::Output;

#[derive(Parser)]
#[command(name = "waveqed", version, about = "Few-photon pulse scattering off a two-level emitter in a waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set model.gamma_over_omega=2`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Correlator-table cache file, reused when its parameters match.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Density and phase-space distribution of the input pulse.
    Initial,
    /// Phase-space distributions at a snapshot, one file per panel.
    PhaseSpace,
    /// Densities and photon-number balance at snapshot times.
    Density,
    /// Spectra of the outgoing light.
    Spectrum,
    /// Photon numbers and variances after the scattering.
    Stats,
    /// Statistics over a grid of decay rates and separations.
    Sweep,
    /// Invariant checks and the discrete-mode comparison.
    Validate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let config = config::load(cli.config.as_deref(), &cli.set)?;
    config.resolve()?;
    let mut out = Output::new(&config.output)?;
    let ctx = Context { config, cache: cli.cache };
    let result = match cli.command {
        Command::Initial => commands::initial(&ctx, &mut out),
        Command::PhaseSpace => commands::phase_space(&ctx, &mut out),
        Command::Density => commands::density_cmd(&ctx, &mut out),
        Command::Spectrum => commands::spectrum_cmd(&ctx, &mut out),
        Command::Stats => commands::stats(&ctx, &mut out),
        Command::Sweep => commands::sweep(&ctx, &mut out),
        Command::Validate => validate::validate(&ctx, &mut out),
    };
    for path in &out.written {
        println!("wrote {}", path.display());
    }
    result
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("waveqed: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
