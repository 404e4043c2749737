//! Trajectory analytics: DTW social distance, phase classification and
//! convergence timelines.

mod dtw;
mod matrix;
mod phases;
mod stats;
mod trajectory;

use thiserror::Error;

pub use dtw::{dtw_distance, Dtw};
pub use matrix::{pairwise_matrix, social_distance, DistanceMatrix};
pub use phases::{classify_phases, separation_score, PhaseClassification, PhaseLabel, RunDistance};
pub use stats::{mean_angular_deviation, run_statistics, Timelines};
pub use trajectory::{Trajectory, TrajectoryFeature};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("trajectory for agent {0} has no samples")]
    EmptyTrajectory(u32),
    #[error("need at least {needed} trajectories, got {got}")]
    TooFewTrajectories { needed: usize, got: usize },
    #[error("insufficient data for 3-phase classification")]
    InsufficientData,
    #[error("degenerate clustering: fewer than three distinct distance levels")]
    Degenerate,
    #[error("trajectory for agent {0} is missing heading samples")]
    MissingHeadings(u32),
}
