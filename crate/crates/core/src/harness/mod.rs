//! Config loading, seeded runs and sweeps, CSV output and batch analysis.

mod analyze;
mod config;
pub mod io;
mod presets;
mod runner;

pub use analyze::{analyze_dir, mean_social_distance, AnalysisSummary};
pub use config::{load_config, parse_config, ExperimentConfig};
pub use presets::{preset, preset_names, preset_source, PHASE_SIH_GRID};
pub use runner::{
    run_experiment, simulate, simulate_with, sweep, with_threads, Frame, RunOutput, RunRecord,
    SweepParam,
};
