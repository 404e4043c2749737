use serde::{Deserialize, Serialize};

use crate::vector::BeliefVector;

/// Stable agent identifier. Within a [`World`](super::World) an agent's id is
/// also its index in the agent array.
pub type AgentId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub population: usize,
    pub position: BeliefVector,
    /// Unit heading.
    pub orientation: BeliefVector,
    /// Units per second.
    pub speed: f64,
    /// Influence weight. 1.0 unless amplified by herding.
    pub weight: f64,
    /// Current social influence horizon (amplified value while herded).
    pub sih: f64,
    /// Horizon configured for this agent's population.
    pub base_sih: f64,
    /// Fraction of the remaining angle turned per second.
    pub turn_rate: f64,
    pub amplified: bool,
    pub respawns: u32,
}

impl Agent {
    pub fn new(
        id: AgentId,
        population: usize,
        position: BeliefVector,
        orientation: BeliefVector,
        speed: f64,
        sih: f64,
        turn_rate: f64,
    ) -> Self {
        Self {
            id,
            population,
            position,
            orientation,
            speed,
            weight: 1.0,
            sih,
            base_sih: sih,
            turn_rate,
            amplified: false,
            respawns: 0,
        }
    }

    pub fn dimensions(&self) -> usize {
        self.position.len()
    }

    /// Drops any herding amplification.
    pub fn restore(&mut self) {
        self.weight = 1.0;
        self.sih = self.base_sih;
        self.amplified = false;
    }
}
