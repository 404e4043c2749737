//! JSON wire format shared by the server and browser clients.
//!
//! Every message carries `v`, the protocol version, and a `type` tag.

use beliefsim::analytics::PhaseLabel;
use beliefsim::dynamics::{Border, BoundaryEvent};
use beliefsim::harness::ExperimentConfig;
use beliefsim::herding::{HerdingMode, HerdingPolicy};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

/// An operator action. Applied before the next simulation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControlCommand {
    SetSih {
        population: usize,
        value: f64,
    },
    /// Unset fields keep their current values.
    SetHerding {
        mode: HerdingMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplified_weight: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplified_sih: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_population: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        opposing_source: Option<usize>,
    },
    SetBorder {
        border: Border,
    },
    SetSpeedRange {
        min: f64,
        max: f64,
    },
    Pause,
    Resume,
    /// Rebuilds the world with the current controls; `seed` defaults to the
    /// seed in use.
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    SetPopulationMix {
        nomad_fraction: f64,
    },
    SetRate {
        steps_per_second: f64,
    },
}

impl ControlCommand {
    /// Whether the command changes simulation state (as opposed to pacing).
    pub fn affects_state(&self) -> bool {
        !matches!(self, Self::Pause | Self::Resume | Self::SetRate { .. })
    }
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientMessage {
    pub v: u32,
    /// Echoed in the matching ack or error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    /// Latest snapshot step the client had seen; kept in the session log.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issued_at: Option<u64>,
    #[serde(flatten)]
    pub command: ControlCommand,
}

impl ClientMessage {
    pub fn new(command: ControlCommand) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            id: None,
            issued_at: None,
            command,
        }
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.id = Some(id);
        self
    }

    pub fn issued_at(mut self, step: u64) -> Self {
        self.issued_at = Some(step);
        self
    }
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    /// First message on every connection.
    Hello {
        v: u32,
        seed: u64,
        step: u64,
        config: ExperimentConfig,
    },
    Snapshot(SnapshotMessage),
    Ack {
        v: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        /// Simulation tick at which the command took effect.
        tick: u64,
    },
    Error {
        v: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        message: String,
    },
}

/// One agent, projected onto two chosen dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentView {
    pub id: u32,
    pub population: usize,
    pub x: f64,
    pub y: f64,
    pub hx: f64,
    pub hy: f64,
    pub speed: f64,
    pub amplified: bool,
}

/// A heatmap cell whose count changed, with its new count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDelta {
    pub cell: Vec<i32>,
    pub count: u64,
}

/// Current values of the steerable settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlState {
    pub seed: u64,
    pub paused: bool,
    pub steps_per_second: f64,
    pub border: Border,
    pub herding: HerdingPolicy,
    /// Per population.
    pub sih: Vec<f64>,
    pub counts: Vec<usize>,
    pub speed_range: Vec<[f64; 2]>,
}

/// Rolling estimate from the trailing window of sampled positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    /// Samples in the window.
    pub window: usize,
    pub mean_distance: f64,
    /// Mean angle (radians) between headings and the population mean.
    pub heading_deviation: f64,
    /// Present when the server was given phase boundaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<PhaseLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMessage {
    pub v: u32,
    /// Steps advanced since the server started. Monotone across resets.
    pub tick: u64,
    /// World step index (restarts at zero on reset).
    pub step: u64,
    pub sim_time: f64,
    /// Dimensions used for `x`/`y` and `hx`/`hy`.
    pub projection: [usize; 2],
    pub agents: Vec<AgentView>,
    /// Boundary events since the previous snapshot.
    pub events: Vec<BoundaryEvent>,
    /// True when the heatmap was cleared (reset) since the previous snapshot.
    pub heatmap_reset: bool,
    pub heatmap_delta: Vec<CellDelta>,
    pub controls: ControlState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseEstimate>,
}
