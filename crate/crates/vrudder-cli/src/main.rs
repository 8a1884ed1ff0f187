//! `vrudder`: design and analysis of a differential-thrust "virtual
//! rudder" for a transport aircraft that lost its vertical stabilizer.
//! Every subcommand reads one configuration document, writes its artifacts
//! into the output directory, and records a run manifest.

use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};

use vrudder_cli::commands;
use vrudder_cli::config::{Config, Overrides, DEFAULT_CONFIG};
use vrudder_cli::error::{CliError, Result};
use vrudder_cli::manifest::write_manifest;

#[derive(Parser)]
#[command(
    name = "vrudder",
    version,
    about = "Differential-thrust virtual-rudder design and analysis toolkit"
)]
struct Cli {
    /// Configuration file; defaults to the bundled 747-100 data set.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for traces, reports, plots, and the manifest.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Override the Monte-Carlo sampling seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override the Monte-Carlo run count.
    #[arg(long, global = true, value_name = "N")]
    runs: Option<usize>,

    /// Override the uncertainty level (fraction of the nominal peak gain).
    #[arg(long, global = true, value_name = "LEVEL")]
    uncertainty: Option<f64>,

    /// Override the integration step (s).
    #[arg(long, global = true, value_name = "SECONDS")]
    dt: Option<f64>,

    /// Override the run horizon (s) of time-domain commands.
    #[arg(long, global = true, value_name = "SECONDS")]
    duration: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Report the published and table-derived plant matrices.
    Model,
    /// Report the dynamic modes of the damaged aircraft.
    Modes,
    /// Trace the engine's full-throttle step response.
    Engine,
    /// Sweep the rudder-command-to-thrust mapping.
    Map,
    /// Simulate the unassisted damaged aircraft.
    Openloop,
    /// Run the loop-shaping controller synthesis.
    Synth,
    /// Report disk margins at the plant input and output.
    Margins,
    /// Simulate the nominal constrained closed loop.
    Sim,
    /// Run the seeded Monte-Carlo robustness campaign.
    Monte,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Model => "model",
            Command::Modes => "modes",
            Command::Engine => "engine",
            Command::Map => "map",
            Command::Openloop => "openloop",
            Command::Synth => "synth",
            Command::Margins => "margins",
            Command::Sim => "sim",
            Command::Monte => "monte",
        }
    }

    fn dispatch(self, cfg: &Config, out: &std::path::Path) -> Result<Vec<PathBuf>> {
        match self {
            Command::Model => commands::cmd_model(cfg, out),
            Command::Modes => commands::cmd_modes(cfg, out),
            Command::Engine => commands::cmd_engine(cfg, out),
            Command::Map => commands::cmd_map(cfg, out),
            Command::Openloop => commands::cmd_openloop(cfg, out),
            Command::Synth => commands::cmd_synth(cfg, out),
            Command::Margins => commands::cmd_margins(cfg, out),
            Command::Sim => commands::cmd_sim(cfg, out),
            Command::Monte => commands::cmd_monte(cfg, out),
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let (mut cfg, raw) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::config(format!("cannot read config {}: {e}", path.display()))
            })?;
            (Config::from_str(&text)?, text.into_bytes())
        }
        None => (Config::bundled(), DEFAULT_CONFIG.as_bytes().to_vec()),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        runs: cli.runs,
        uncertainty: cli.uncertainty,
        dt: cli.dt,
        duration: cli.duration,
    });
    std::fs::create_dir_all(&cli.out)?;
    let mut outputs = cli.command.dispatch(&cfg, &cli.out)?;
    let manifest =
        write_manifest(&cli.out, cli.command.name(), &raw, cfg.uncertainty.seed, &outputs)?;
    outputs.push(manifest);
    Ok(outputs)
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outputs) => {
            for path in outputs {
                println!("{}", path.display());
            }
        }
        Err(e) => {
            eprintln!("{}", e.record());
            exit(e.exit_code());
        }
    }
}
