//! Belief-space agents, their environment and the per-step update.

mod agent;
mod environment;
mod rules;
mod world;

pub use agent::{Agent, AgentId};
pub use environment::{apply_boundary, Border, BoundaryEvent, BoundaryKind, Cell, Environment, Heatmap};
pub use rules::{
    effective_sih, falloff, slew_fraction, slew_orientation, target_orientation, update_position,
    Influence, ANTIPARALLEL_EPSILON,
};
pub use world::{init_world, LogEntry, PopulationConfig, World, WorldConfig};
