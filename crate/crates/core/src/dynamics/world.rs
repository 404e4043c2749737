use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agent::{Agent, AgentId};
use super::environment::{apply_boundary, Border, BoundaryEvent, BoundaryKind, Environment};
use super::rules::{slew_fraction, slew_orientation, target_orientation, update_position};
use crate::error::ConfigError;
use crate::herding::{apply_amplification, select_amplified, HerdingMode, HerdingPolicy};
use crate::rng::{random_in_cube, random_speed, random_unit, stream, StreamPurpose, WORLD_STREAM};
use crate::vector::{MAX_DIMENSIONS, MIN_DIMENSIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub count: usize,
    pub sih: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub turn_rate: f64,
    /// Whether members are influenced by agents of other populations.
    pub sees_other: bool,
}

impl PopulationConfig {
    pub fn new(count: usize, sih: f64) -> Self {
        Self {
            count,
            sih,
            speed_min: 0.1,
            speed_max: 2.0,
            turn_rate: 2.0,
            sees_other: true,
        }
    }
}

/// Everything needed to build a [`World`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub dimensions: usize,
    pub extent: f64,
    pub border: Border,
    pub init_half_range: f64,
    pub cell_size: f64,
    pub dt: f64,
    /// Agents also move their speed toward the neighbourhood mean speed.
    pub speed_adaptation: bool,
    pub populations: Vec<PopulationConfig>,
    pub herding: HerdingPolicy,
}

impl WorldConfig {
    /// Defaults for everything except the dimension count and populations.
    pub fn new(dimensions: usize, populations: Vec<PopulationConfig>) -> Self {
        Self {
            dimensions,
            extent: 10.0,
            border: Border::Reflect,
            init_half_range: 5.0,
            cell_size: 0.5,
            dt: 0.1,
            speed_adaptation: true,
            populations,
            herding: HerdingPolicy::off(),
        }
    }

    pub fn agent_count(&self) -> usize {
        self.populations.iter().map(|p| p.count).sum()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(field, format!("must be finite and > 0 (got {v})")))
            }
        }
        fn non_negative(field: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(field, format!("must be finite and >= 0 (got {v})")))
            }
        }

        if !(MIN_DIMENSIONS..=MAX_DIMENSIONS).contains(&self.dimensions) {
            return Err(ConfigError::invalid(
                "dimensions",
                format!("out of range [{MIN_DIMENSIONS},{MAX_DIMENSIONS}]"),
            ));
        }
        positive("extent", self.extent)?;
        positive("init_half_range", self.init_half_range)?;
        if self.init_half_range > self.extent {
            return Err(ConfigError::invalid("init_half_range", "must not exceed extent"));
        }
        positive("cell_size", self.cell_size)?;
        positive("dt", self.dt)?;
        if self.populations.is_empty() || self.populations.len() > 2 {
            return Err(ConfigError::invalid("populations", "must list one or two populations"));
        }
        for (i, p) in self.populations.iter().enumerate() {
            let f = |name: &str| format!("populations[{i}].{name}");
            if p.count == 0 {
                return Err(ConfigError::invalid(f("count"), "must be >= 1"));
            }
            non_negative(&f("sih"), p.sih)?;
            positive(&f("speed_min"), p.speed_min)?;
            positive(&f("speed_max"), p.speed_max)?;
            if p.speed_max < p.speed_min {
                return Err(ConfigError::invalid(f("speed_max"), "must be >= speed_min"));
            }
            positive(&f("turn_rate"), p.turn_rate)?;
        }
        let h = &self.herding;
        if !(h.amplified_weight.is_finite() && h.amplified_weight >= 1.0) {
            return Err(ConfigError::invalid("herding.amplified_weight", "must be >= 1"));
        }
        non_negative("herding.amplified_sih", h.amplified_sih)?;
        let pops = self.populations.len();
        if h.target_population >= pops {
            return Err(ConfigError::invalid(
                "herding.target_population",
                format!("refers to population {} but only {pops} exist", h.target_population),
            ));
        }
        if h.opposing_source >= pops {
            return Err(ConfigError::invalid(
                "herding.opposing_source",
                format!("refers to population {} but only {pops} exist", h.opposing_source),
            ));
        }
        if h.mode == HerdingMode::Opposing && h.opposing_source == h.target_population {
            return Err(ConfigError::invalid(
                "herding.opposing_source",
                "must differ from target_population for opposing herding",
            ));
        }
        if let Some(id) = h.fixed_leader_id {
            let ok = self
                .population_range(h.target_population)
                .contains(&(id as usize));
            if !ok {
                return Err(ConfigError::invalid(
                    "herding.fixed_leader_id",
                    "must name an agent of the target population",
                ));
            }
        }
        Ok(())
    }

    /// Agent ids belonging to `population` (populations are laid out in order).
    pub fn population_range(&self, population: usize) -> std::ops::Range<usize> {
        let start: usize = self.populations[..population].iter().map(|p| p.count).sum();
        start..start + self.populations[population].count
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: u64,
    pub message: String,
}

/// Double-buffered simulation state.
///
/// Each [`step`](World::step) reads only the agent array as it stood at the
/// end of the previous step and writes the next state into a back buffer,
/// which is then swapped in.
#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    seed: u64,
    environment: Environment,
    agents: Vec<Agent>,
    back: Vec<Agent>,
    sim_time: f64,
    step_index: u64,
    events: Vec<BoundaryEvent>,
    leader: Option<AgentId>,
    log: Vec<LogEntry>,
    parallel: bool,
}

impl World {
    pub fn new(config: WorldConfig, seed: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let d = config.dimensions;
        let mut agents = Vec::with_capacity(config.agent_count());
        for (population, pc) in config.populations.iter().enumerate() {
            for _ in 0..pc.count {
                let id = agents.len() as AgentId;
                let mut rng = stream(seed, 0, id as u64, StreamPurpose::Init);
                let position = random_in_cube(&mut rng, d, config.init_half_range);
                let orientation = random_unit(&mut rng, d);
                let speed = random_speed(&mut rng, pc.speed_min, pc.speed_max);
                agents.push(Agent::new(
                    id,
                    population,
                    position,
                    orientation,
                    speed,
                    pc.sih,
                    pc.turn_rate,
                ));
            }
        }
        let environment = Environment::new(
            d,
            config.extent,
            config.border,
            config.init_half_range,
            config.cell_size,
        );
        let mut world = Self {
            back: agents.clone(),
            agents,
            environment,
            seed,
            sim_time: 0.0,
            step_index: 0,
            events: Vec::new(),
            leader: None,
            log: Vec::new(),
            parallel: true,
            config,
        };
        world.leader = world.draw_leader(0);
        Ok(world)
    }

    fn draw_leader(&self, step: u64) -> Option<AgentId> {
        let h = &self.config.herding;
        if let Some(id) = h.fixed_leader_id {
            return Some(id);
        }
        let range = self.config.population_range(h.target_population);
        if range.is_empty() {
            return None;
        }
        let mut rng = stream(self.seed, step, WORLD_STREAM, StreamPurpose::Leader);
        Some(rng.random_range(range) as AgentId)
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn environment(&self) -> &Environment {
        &self.environment
    }

    pub fn environment_mut(&mut self) -> &mut Environment {
        &mut self.environment
    }

    pub fn sim_time(&self) -> f64 {
        self.sim_time
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// Boundary events raised by the most recent step.
    pub fn events(&self) -> &[BoundaryEvent] {
        &self.events
    }

    pub fn leader(&self) -> Option<AgentId> {
        self.leader
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn herding(&self) -> &HerdingPolicy {
        &self.config.herding
    }

    /// Sequential execution produces bit-identical results; this only
    /// controls whether the influence pass fans out over rayon.
    pub fn set_parallel(&mut self, parallel: bool) {
        self.parallel = parallel;
    }

    /// Advances one step of `config.dt` seconds.
    pub fn step(&mut self) {
        self.step_impl(None);
    }

    /// Same as [`step`](World::step) but visits agents in `order` during the
    /// influence pass. Exposed to check update-order independence.
    #[doc(hidden)]
    pub fn step_in_order(&mut self, order: &[usize]) {
        self.step_impl(Some(order));
    }

    fn step_impl(&mut self, order: Option<&[usize]>) {
        let dt = self.config.dt;
        let step = self.step_index;

        // Herding barrier: select against the previous snapshot.
        let mut rng = stream(self.seed, step, WORLD_STREAM, StreamPurpose::Selection);
        let selection = select_amplified(&self.config.herding, &self.agents, self.leader, &mut rng);
        if selection.fell_back {
            self.log.push(LogEntry {
                step,
                message: "mean heading undefined; amplified a random agent".into(),
            });
        }
        apply_amplification(&mut self.agents, &selection, &self.config.herding);

        // Influence pass.
        let snapshot = &self.agents;
        let pops = &self.config.populations;
        let adapt = self.config.speed_adaptation;
        let advance = |me: &Agent| advance_agent(me, snapshot, pops, dt, adapt);
        match order {
            Some(order) => {
                for &i in order {
                    self.back[i] = advance(&snapshot[i]);
                }
            }
            None if self.parallel => {
                self.back
                    .par_iter_mut()
                    .zip(snapshot.par_iter())
                    .for_each(|(out, me)| *out = advance(me));
            }
            None => {
                for (out, me) in self.back.iter_mut().zip(snapshot) {
                    *out = advance(me);
                }
            }
        }

        // Borders, then heatmap.
        self.events.clear();
        let extent = self.environment.extent;
        for agent in self.back.iter_mut() {
            if agent.position.iter().all(|c| c.abs() <= extent) {
                continue;
            }
            let pc = &pops[agent.population];
            let mut rng = stream(self.seed, step, agent.id as u64, StreamPurpose::Respawn);
            let events = apply_boundary(
                agent,
                &self.environment,
                (pc.speed_min, pc.speed_max),
                step,
                &mut rng,
            );
            self.events.extend(events);
        }
        for agent in &self.back {
            self.environment.heatmap.record(&agent.position);
        }

        std::mem::swap(&mut self.agents, &mut self.back);
        self.sim_time += dt;
        self.step_index += 1;
    }

    /// Runs `n` steps.
    pub fn run(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    pub fn respawned_this_step(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.events
            .iter()
            .filter(|e| e.kind == BoundaryKind::Respawned)
            .map(|e| e.agent)
    }

    // Live controls. These take effect at the next step.

    pub fn set_sih(&mut self, population: usize, sih: f64) -> Result<(), ConfigError> {
        let field = format!("populations[{population}].sih");
        let pc = self
            .config
            .populations
            .get_mut(population)
            .ok_or_else(|| ConfigError::invalid(&field, "no such population"))?;
        if !(sih.is_finite() && sih >= 0.0) {
            return Err(ConfigError::invalid(field, "must be finite and >= 0"));
        }
        pc.sih = sih;
        for a in self.agents.iter_mut().filter(|a| a.population == population) {
            a.base_sih = sih;
            if !a.amplified {
                a.sih = sih;
            }
        }
        Ok(())
    }

    pub fn set_herding(&mut self, policy: HerdingPolicy) -> Result<(), ConfigError> {
        let mut candidate = self.config.clone();
        candidate.herding = policy;
        candidate.validate()?;
        let leader_changed = candidate.herding.fixed_leader_id != self.config.herding.fixed_leader_id
            || candidate.herding.target_population != self.config.herding.target_population;
        self.config = candidate;
        if leader_changed || self.leader.is_none() {
            self.leader = self.draw_leader(self.step_index);
        }
        Ok(())
    }

    pub fn set_border(&mut self, border: Border) {
        self.config.border = border;
        self.environment.border = border;
    }

    pub fn set_speed_range(&mut self, min: f64, max: f64) -> Result<(), ConfigError> {
        if !(min.is_finite() && min > 0.0) {
            return Err(ConfigError::invalid("speed_min", "must be finite and > 0"));
        }
        if !(max.is_finite() && max >= min) {
            return Err(ConfigError::invalid("speed_max", "must be >= speed_min"));
        }
        for pc in &mut self.config.populations {
            pc.speed_min = min;
            pc.speed_max = max;
        }
        for a in &mut self.agents {
            a.speed = a.speed.clamp(min, max);
        }
        Ok(())
    }

    /// Makes the first `round(fraction * n)` agents nomads (population 1,
    /// horizon 0) and the rest members of population 0.
    pub fn set_population_mix(&mut self, nomad_fraction: f64) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&nomad_fraction) {
            return Err(ConfigError::invalid("nomad_fraction", "must lie in [0, 1]"));
        }
        let n = self.agents.len();
        let nomads = (nomad_fraction * n as f64).round() as usize;
        if self.config.populations.len() < 2 {
            let mut p = self.config.populations[0].clone();
            p.count = 0;
            self.config.populations.push(p);
        }
        self.config.populations[1].sih = 0.0;
        self.config.populations[1].count = nomads;
        self.config.populations[0].count = n - nomads;
        let (main_sih, main_turn) = (self.config.populations[0].sih, self.config.populations[0].turn_rate);
        let nomad_turn = self.config.populations[1].turn_rate;
        for (i, a) in self.agents.iter_mut().enumerate() {
            let (population, sih, turn) = if i < nomads {
                (1, 0.0, nomad_turn)
            } else {
                (0, main_sih, main_turn)
            };
            a.population = population;
            a.base_sih = sih;
            a.turn_rate = turn;
            if !a.amplified {
                a.sih = sih;
            }
        }
        Ok(())
    }
}

fn advance_agent(
    me: &Agent,
    snapshot: &[Agent],
    populations: &[PopulationConfig],
    dt: f64,
    speed_adaptation: bool,
) -> Agent {
    let sees_other = populations[me.population].sees_other;
    let visible = |o: &Agent| sees_other || o.population == me.population;
    let mut next = *me;
    next.position = update_position(me, dt);
    if let Some(influence) = target_orientation(me, snapshot, visible) {
        next.orientation = slew_orientation(&me.orientation, &influence.direction, me.turn_rate, dt);
        if speed_adaptation {
            let f = slew_fraction(me.turn_rate, dt);
            next.speed = me.speed + f * (influence.mean_speed - me.speed);
        }
    }
    next
}

/// Builds a world from `config`, deterministic under `seed`.
pub fn init_world(config: WorldConfig, seed: u64) -> Result<World, ConfigError> {
    World::new(config, seed)
}
