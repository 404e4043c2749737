//! Belief-space flocking: agents with a position and heading in an
//! N-dimensional space align with neighbours inside their social influence
//! horizon. Small horizons give independent nomads, mid-range horizons
//! give flocks and large ones collapse into stampedes.
//!
//! * [`dynamics`]: agents, borders and the double-buffered step.
//! * [`herding`]: adversarial amplification of selected agents.
//! * [`analytics`]: DTW social distance and phase classification.
//! * [`harness`]: configs, seeded runs, sweeps and CSV output.

pub mod analytics;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod herding;
pub mod rng;
pub mod vector;

pub use error::{ConfigError, Error, Result};
pub use vector::BeliefVector;
