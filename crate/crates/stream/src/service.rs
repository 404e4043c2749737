//! The steerable simulation behind the server, independent of any transport.

use std::collections::VecDeque;

use beliefsim::analytics::{mean_angular_deviation, Dtw, PhaseLabel, Trajectory};
use beliefsim::dynamics::{BoundaryEvent, World};
use beliefsim::harness::{mean_social_distance, ExperimentConfig};
use beliefsim::BeliefVector;

use crate::error::{Result, StreamError};
use crate::protocol::{
    AgentView, CellDelta, ControlCommand, ControlState, PhaseEstimate, SnapshotMessage, PROTOCOL_VERSION,
};
use crate::replay::ReplayLog;

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceOptions {
    /// Dimensions shown as x and y.
    pub projection: [usize; 2],
    pub steps_per_second: f64,
    /// Samples kept for the rolling phase estimate; 0 disables it.
    pub phase_window: usize,
    /// Steps between phase samples.
    pub phase_sample_every: u64,
    /// Stampede/flock and flock/nomad distance boundaries for labelling.
    pub phase_boundaries: Option<[f64; 2]>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self {
            projection: [0, 1],
            steps_per_second: 30.0,
            phase_window: 20,
            phase_sample_every: 10,
            phase_boundaries: None,
        }
    }
}

/// A world plus the live-control state around it.
pub struct Simulation {
    config: ExperimentConfig,
    world: World,
    options: ServiceOptions,
    paused: bool,
    tick: u64,
    heatmap_reset: bool,
    history: VecDeque<Vec<(BeliefVector, BeliefVector)>>,
    phase: Option<PhaseEstimate>,
    events: VecDeque<BoundaryEvent>,
    log: ReplayLog,
}

/// Boundary events kept between two snapshots; older ones are dropped.
pub const MAX_PENDING_EVENTS: usize = 10_000;

impl Simulation {
    pub fn new(config: ExperimentConfig, seed: u64, options: ServiceOptions) -> Result<Self> {
        config.validate()?;
        let world = new_world(&config, seed)?;
        for &d in &options.projection {
            if d >= world.config().dimensions {
                return Err(StreamError::Projection {
                    dimension: d,
                    dimensions: world.config().dimensions,
                });
            }
        }
        check_rate(options.steps_per_second)?;
        let log = ReplayLog::new(config.clone(), seed);
        Ok(Self {
            config,
            world,
            options,
            paused: false,
            tick: 0,
            heatmap_reset: false,
            history: VecDeque::new(),
            phase: None,
            events: VecDeque::new(),
            log,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn options(&self) -> &ServiceOptions {
        &self.options
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn steps_per_second(&self) -> f64 {
        self.options.steps_per_second
    }

    /// Every state-changing command applied so far, with its tick.
    pub fn replay_log(&self) -> &ReplayLog {
        &self.log
    }

    /// Applies `command`. Failed commands leave the state untouched and are
    /// not logged.
    pub fn apply(&mut self, command: &ControlCommand) -> Result<()> {
        self.apply_issued(command, None)
    }

    /// Like [`apply`](Self::apply), recording the step the client had seen
    /// when it issued the command.
    pub fn apply_issued(&mut self, command: &ControlCommand, issued_at: Option<u64>) -> Result<()> {
        match command {
            ControlCommand::SetSih { population, value } => self.world.set_sih(*population, *value)?,
            ControlCommand::SetHerding {
                mode,
                amplified_weight,
                amplified_sih,
                target_population,
                opposing_source,
            } => {
                let mut policy = self.world.herding().clone();
                policy.mode = *mode;
                if let Some(w) = amplified_weight {
                    policy.amplified_weight = *w;
                }
                if let Some(r) = amplified_sih {
                    policy.amplified_sih = *r;
                }
                if let Some(t) = target_population {
                    policy.target_population = *t;
                }
                if let Some(s) = opposing_source {
                    policy.opposing_source = *s;
                }
                self.world.set_herding(policy)?;
            }
            ControlCommand::SetBorder { border } => self.world.set_border(*border),
            ControlCommand::SetSpeedRange { min, max } => self.world.set_speed_range(*min, *max)?,
            ControlCommand::Pause => self.paused = true,
            ControlCommand::Resume => self.paused = false,
            ControlCommand::Reset { seed } => {
                let seed = seed.unwrap_or(self.world.seed());
                let mut world = World::new(self.world.config().clone(), seed)?;
                world.environment_mut().heatmap.track_changes();
                self.world = world;
                self.history.clear();
                self.phase = None;
                self.events.clear();
                self.heatmap_reset = true;
            }
            ControlCommand::SetPopulationMix { nomad_fraction } => self.world.set_population_mix(*nomad_fraction)?,
            ControlCommand::SetRate { steps_per_second } => {
                check_rate(*steps_per_second)?;
                self.options.steps_per_second = *steps_per_second;
            }
        }
        if command.affects_state() {
            self.log.record(self.tick, issued_at, command.clone());
        }
        Ok(())
    }

    /// One step unless paused. Returns whether the world advanced.
    pub fn advance(&mut self) -> bool {
        if self.paused {
            return false;
        }
        self.step();
        true
    }

    /// One step regardless of the pause flag.
    pub fn step(&mut self) {
        self.world.step();
        self.tick += 1;
        self.events.extend(self.world.events().iter().copied());
        while self.events.len() > MAX_PENDING_EVENTS {
            self.events.pop_front();
        }
        if self.options.phase_window > 0 && self.world.step_index().is_multiple_of(self.options.phase_sample_every.max(1)) {
            self.sample_phase();
        }
    }

    fn sample_phase(&mut self) {
        let sample = self.world.agents().iter().map(|a| (a.position, a.orientation)).collect();
        self.history.push_back(sample);
        while self.history.len() > self.options.phase_window {
            self.history.pop_front();
        }
        if self.history.len() < self.options.phase_window.max(2) {
            return;
        }
        let period = self.world.config().dt * self.options.phase_sample_every as f64;
        let trajectories: Vec<Trajectory> = self
            .world
            .agents()
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                let positions = self.history.iter().map(|s| s[i].0).collect();
                Trajectory::new(a.id, a.population, period, positions).ok()
            })
            .collect();
        let Ok(mean_distance) = mean_social_distance(&trajectories, &Dtw::new()) else {
            return;
        };
        let headings: Vec<BeliefVector> = self.world.agents().iter().map(|a| a.orientation).collect();
        self.phase = Some(PhaseEstimate {
            window: self.history.len(),
            mean_distance,
            heading_deviation: mean_angular_deviation(&headings),
            label: self.options.phase_boundaries.map(|b| label(mean_distance, b)),
        });
    }

    pub fn controls(&self) -> ControlState {
        let c = self.world.config();
        ControlState {
            seed: self.world.seed(),
            paused: self.paused,
            steps_per_second: self.options.steps_per_second,
            border: c.border,
            herding: self.world.herding().clone(),
            sih: c.populations.iter().map(|p| p.sih).collect(),
            counts: c.populations.iter().map(|p| p.count).collect(),
            speed_range: c.populations.iter().map(|p| [p.speed_min, p.speed_max]).collect(),
        }
    }

    /// The current state, with the boundary events and heatmap cells changed
    /// since the last snapshot. Taking a snapshot never alters the world.
    pub fn snapshot(&mut self) -> SnapshotMessage {
        let [px, py] = self.options.projection;
        let agents = self
            .world
            .agents()
            .iter()
            .map(|a| AgentView {
                id: a.id,
                population: a.population,
                x: a.position[px],
                y: a.position[py],
                hx: a.orientation[px],
                hy: a.orientation[py],
                speed: a.speed,
                amplified: a.amplified,
            })
            .collect();
        let heatmap_delta = self
            .world
            .environment_mut()
            .heatmap
            .take_changes()
            .into_iter()
            .map(|(cell, count)| CellDelta { cell, count })
            .collect();
        SnapshotMessage {
            v: PROTOCOL_VERSION,
            tick: self.tick,
            step: self.world.step_index(),
            sim_time: self.world.sim_time(),
            projection: self.options.projection,
            agents,
            events: self.events.drain(..).collect(),
            heatmap_reset: std::mem::take(&mut self.heatmap_reset),
            heatmap_delta,
            controls: self.controls(),
            phase: self.phase.clone(),
        }
    }
}

fn new_world(config: &ExperimentConfig, seed: u64) -> Result<World> {
    let mut world = World::new(config.world_config(), seed)?;
    world.environment_mut().heatmap.track_changes();
    Ok(world)
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(StreamError::Rate(rate))
    }
}

fn label(distance: f64, boundaries: [f64; 2]) -> PhaseLabel {
    if distance < boundaries[0] {
        PhaseLabel::Stampede
    } else if distance < boundaries[1] {
        PhaseLabel::Flock
    } else {
        PhaseLabel::Nomad
    }
}
