//! Command-line front end: batch runs, sweeps, analysis and the live server.

use std::path::PathBuf;

use beliefsim::harness::{self, load_config, ExperimentConfig};
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::error::StreamError;
use crate::replay::{replay, ReplayLog};
use crate::server::{self, ServerOptions};
use crate::service::{ServiceOptions, Simulation};

#[derive(Debug, Parser)]
#[command(name = "beliefsim", version, about = "Belief-space flocking simulator")]
pub struct Cli {
    /// Worker threads for runs and analysis.
    #[arg(long, global = true, env = "BELIEFSIM_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every repetition of a config and write CSVs.
    Run {
        /// TOML file, or `preset:<name>`.
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "BELIEFSIM_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Run a config once per parameter value.
    Sweep {
        config: String,
        /// sih, sih.<population>, herding_weight, dt or dimensions.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long, env = "BELIEFSIM_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// DTW social distances and phase labels for every run under a directory.
    Analyze {
        dir: PathBuf,
        /// Sakoe-Chiba band half-width in samples.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Live websocket server.
    Serve {
        config: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Steps per second.
        #[arg(long, default_value_t = 30.0)]
        rate: f64,
        /// Snapshot broadcasts per second.
        #[arg(long, default_value_t = 20.0)]
        snapshot_hz: f64,
        /// Dimensions shown as x and y.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0, 1])]
        projection: Vec<usize>,
        /// Stampede/flock and flock/nomad distance boundaries for phase labels.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        phase_boundaries: Option<Vec<f64>>,
        /// Where to write the session's command log on exit.
        #[arg(long)]
        replay_log: Option<PathBuf>,
    },
    /// Re-run a saved session headlessly and print its final state.
    Replay {
        log: PathBuf,
        /// Steps to run; defaults to the tick of the last command.
        #[arg(long)]
        ticks: Option<u64>,
    },
    /// List the bundled presets.
    Presets,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] beliefsim::Error),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("could not start the async runtime: {0}")]
    Runtime(std::io::Error),
}

impl CliError {
    /// Stable name printed with the message.
    pub fn name(&self) -> &'static str {
        use beliefsim::Error as E;
        match self {
            Self::Core(E::Config(_)) | Self::Stream(StreamError::Config(_)) => "ConfigError",
            Self::Core(E::NotSweepable(_)) => "NotSweepable",
            Self::Core(E::EmptySweep) => "EmptySweep",
            Self::Core(E::Analytics(_)) => "AnalyticsError",
            Self::Core(E::Io { .. }) | Self::Stream(StreamError::Io { .. }) => "IoError",
            Self::Core(E::Csv { .. }) | Self::Core(E::Format { .. }) => "FormatError",
            Self::Stream(StreamError::Core(_)) => "Error",
            Self::Stream(StreamError::Bind { .. }) => "BindError",
            Self::Stream(StreamError::UnsupportedVersion { .. }) | Self::Stream(StreamError::Malformed(_)) => {
                "ReplayFormatError"
            }
            Self::Stream(StreamError::Projection { .. }) | Self::Stream(StreamError::Rate(_)) => "ConfigError",
            Self::Stream(StreamError::SimulationGone) | Self::Runtime(_) => "RuntimeError",
        }
    }

    /// 2 for bad input, 3 for filesystem and network problems, 4 for
    /// analysis failures, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self.name() {
            "ConfigError" | "NotSweepable" | "EmptySweep" | "FormatError" | "ReplayFormatError" => 2,
            "IoError" | "BindError" => 3,
            "AnalyticsError" => 4,
            _ => 1,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let threads = cli.threads.map(usize::from);
    match cli.command {
        Command::Run { config, seed, out } => {
            let c = load_config(&config)?;
            let records = pooled(threads, || harness::run_experiment(&c, seed, &out))?;
            println!("wrote {} runs to {}", records.len(), out.display());
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let c = load_config(&config)?;
            let records = pooled(threads, || harness::sweep(&c, &param, &values, &out))?;
            println!("wrote {} runs over {} values to {}", records.len(), values.len(), out.display());
        }
        Command::Analyze { dir, window } => {
            let summary = pooled(threads, || harness::analyze_dir(&dir, window))?;
            println!("analyzed {} runs; summary in {}", summary.rows.len(), summary.summary_path.display());
            match summary.classification {
                Some(c) => println!(
                    "bands stampede {:?} flock {:?} nomad {:?}; separation {:.3}",
                    c.bands[0], c.bands[1], c.bands[2], c.separation
                ),
                None => println!("too few distinct runs to classify phases"),
            }
        }
        Command::Serve {
            config,
            port,
            host,
            seed,
            rate,
            snapshot_hz,
            projection,
            phase_boundaries,
            replay_log,
        } => {
            let c = load_config(&config)?;
            let options = ServiceOptions {
                projection: [projection[0], projection[1]],
                steps_per_second: rate,
                phase_boundaries: phase_boundaries.map(|b| [b[0], b[1]]),
                ..ServiceOptions::default()
            };
            let server_options = ServerOptions {
                snapshot_hz,
                ..ServerOptions::default()
            };
            serve(c, seed, options, server_options, &format!("{host}:{port}"), replay_log)?;
        }
        Command::Replay { log, ticks } => {
            let log = ReplayLog::load(&log)?;
            let sim = replay(&log, ticks.unwrap_or(log.last_tick()))?;
            let state = serde_json::json!({
                "tick": sim.tick(),
                "step": sim.world().step_index(),
                "agents": sim.world().agents(),
            });
            println!("{state}");
        }
        Command::Presets => {
            for name in harness::preset_names() {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn pooled<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => harness::with_threads(n, f),
        None => f(),
    }
}

fn serve(
    config: ExperimentConfig,
    seed: Option<u64>,
    options: ServiceOptions,
    server_options: ServerOptions,
    addr: &str,
    replay_log: Option<PathBuf>,
) -> Result<(), CliError> {
    let seed = seed.unwrap_or(config.base_seed);
    let sim = Simulation::new(config, seed, options)?;
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::Runtime)?;
    runtime.block_on(async {
        let server = server::start(sim, addr, server_options).await?;
        eprintln!("listening on http://{} (websocket at /ws)", server.local_addr());
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::warn!("signal handler failed: {e}");
        }
        let sim = server.shutdown().await?;
        if let Some(path) = replay_log {
            sim.replay_log().save(&path)?;
            eprintln!("session log written to {}", path.display());
        }
        Ok(())
    })
}
