//! Command logs that reproduce a live session headlessly.

use std::path::Path;

use beliefsim::harness::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StreamError};
use crate::protocol::{ControlCommand, PROTOCOL_VERSION};
use crate::service::{ServiceOptions, Simulation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    /// Steps taken before the command was applied.
    pub tick: u64,
    /// World step the client had seen when it sent the command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issued_at: Option<u64>,
    pub command: ControlCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayLog {
    pub v: u32,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub entries: Vec<ReplayEntry>,
}

impl ReplayLog {
    pub fn new(config: ExperimentConfig, seed: u64) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            seed,
            config,
            entries: Vec::new(),
        }
    }

    pub fn record(&mut self, tick: u64, issued_at: Option<u64>, command: ControlCommand) {
        self.entries.push(ReplayEntry {
            tick,
            issued_at,
            command,
        });
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| StreamError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| StreamError::io(path, e))?;
        let log: Self = serde_json::from_str(&text)?;
        if log.v != PROTOCOL_VERSION {
            return Err(StreamError::UnsupportedVersion {
                got: log.v,
                expected: PROTOCOL_VERSION,
            });
        }
        Ok(log)
    }

    /// Last tick at which a command was recorded.
    pub fn last_tick(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.tick)
    }
}

/// Re-runs `log` for `ticks` steps without pacing or pauses.
pub fn replay(log: &ReplayLog, ticks: u64) -> Result<Simulation> {
    let mut sim = Simulation::new(log.config.clone(), log.seed, ServiceOptions::default())?;
    let mut pending = log.entries.iter().peekable();
    for t in 0..=ticks {
        while let Some(entry) = pending.next_if(|e| e.tick == t) {
            sim.apply(&entry.command)?;
        }
        if t < ticks {
            sim.step();
        }
    }
    Ok(sim)
}
