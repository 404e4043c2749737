use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::agent::{Agent, AgentId};
use crate::rng::{random_in_cube, random_speed, random_unit};
use crate::vector::BeliefVector;

/// What happens when an agent leaves `[-extent, extent]` in some dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Border {
    None,
    Reflect,
    Respawn,
}

impl std::str::FromStr for Border {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Border::None),
            "reflect" => Ok(Border::Reflect),
            "respawn" => Ok(Border::Respawn),
            other => Err(format!("unknown border `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Reflected,
    Respawned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEvent {
    pub step: u64,
    pub agent: AgentId,
    pub population: usize,
    pub kind: BoundaryKind,
    pub dimension: usize,
}

/// Heatmap cell: quantized coordinates, one per dimension.
pub type Cell = Vec<i32>;

/// Sparse visit counts over quantized belief space.
#[derive(Debug, Clone, Default)]
pub struct Heatmap {
    cell_size: f64,
    counts: BTreeMap<Cell, u64>,
    total: u64,
    changes: Option<BTreeMap<Cell, u64>>,
}

impl Heatmap {
    pub fn new(cell_size: f64) -> Self {
        Self {
            cell_size,
            ..Default::default()
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_of(&self, p: &BeliefVector) -> Cell {
        p.iter().map(|c| (c / self.cell_size).floor() as i32).collect()
    }

    pub fn record(&mut self, p: &BeliefVector) {
        let cell = self.cell_of(p);
        let count = self.counts.entry(cell.clone()).or_insert(0);
        *count += 1;
        let count = *count;
        self.total += 1;
        if let Some(changes) = &mut self.changes {
            changes.insert(cell, count);
        }
    }

    pub fn count(&self, cell: &[i32]) -> u64 {
        self.counts.get(cell).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Cell, u64)> {
        self.counts.iter().map(|(c, n)| (c, *n))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Starts recording which cells change so callers can ship deltas.
    pub fn track_changes(&mut self) {
        if self.changes.is_none() {
            self.changes = Some(BTreeMap::new());
        }
    }

    /// Cells changed since the previous call, with their new counts.
    pub fn take_changes(&mut self) -> Vec<(Cell, u64)> {
        match &mut self.changes {
            Some(changes) => std::mem::take(changes).into_iter().collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Environment {
    pub dimensions: usize,
    /// Half-width; borders sit at `±extent` in every dimension.
    pub extent: f64,
    pub border: Border,
    pub init_half_range: f64,
    pub heatmap: Heatmap,
}

impl Environment {
    pub fn new(
        dimensions: usize,
        extent: f64,
        border: Border,
        init_half_range: f64,
        cell_size: f64,
    ) -> Self {
        Self {
            dimensions,
            extent,
            border,
            init_half_range,
            heatmap: Heatmap::new(cell_size),
        }
    }
}

/// Applies the border policy to an agent whose position has already been
/// advanced this step. Returns one event per crossed dimension for REFLECT
/// and a single event for RESPAWN.
pub fn apply_boundary<R: Rng + ?Sized>(
    agent: &mut Agent,
    env: &Environment,
    speed_range: (f64, f64),
    step: u64,
    rng: &mut R,
) -> Vec<BoundaryEvent> {
    let extent = env.extent;
    let event = |kind, dimension| BoundaryEvent {
        step,
        agent: agent.id,
        population: agent.population,
        kind,
        dimension,
    };
    match env.border {
        Border::None => Vec::new(),
        Border::Reflect => {
            let mut events = Vec::new();
            for k in 0..agent.dimensions() {
                let p = agent.position[k];
                if p.abs() > extent {
                    events.push(event(BoundaryKind::Reflected, k));
                    let mut mirrored = 2.0 * p.signum() * extent - p;
                    // Overshoot by more than a full width cannot be mirrored once.
                    if mirrored.abs() > extent {
                        mirrored = mirrored.clamp(-extent, extent);
                    }
                    agent.position[k] = mirrored;
                    agent.orientation[k] = -agent.orientation[k];
                }
            }
            if !events.is_empty() {
                // A reflection flips a component, so the norm is unchanged up to
                // rounding; renormalize anyway.
                if let Ok(u) = agent.orientation.normalize() {
                    agent.orientation = u;
                }
            }
            events
        }
        Border::Respawn => {
            let crossed = (0..agent.dimensions()).find(|&k| agent.position[k].abs() > extent);
            match crossed {
                None => Vec::new(),
                Some(k) => {
                    let e = event(BoundaryKind::Respawned, k);
                    let d = agent.dimensions();
                    agent.position = random_in_cube(rng, d, env.init_half_range);
                    agent.orientation = random_unit(rng, d);
                    agent.speed = random_speed(rng, speed_range.0, speed_range.1);
                    agent.respawns += 1;
                    vec![e]
                }
            }
        }
    }
}
