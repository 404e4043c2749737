//! Adversarial herding: each step one agent per herded population is picked
//! from the previous snapshot and given amplified weight and horizon.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Agent, AgentId};
use crate::vector::{BeliefVector, DEGENERATE_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HerdingMode {
    Off,
    ClosestToMean,
    FixedLeader,
    RandomEachCycle,
    Opposing,
}

impl std::str::FromStr for HerdingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "off" | "none" => Ok(Self::Off),
            "closest_to_mean" => Ok(Self::ClosestToMean),
            "fixed_leader" => Ok(Self::FixedLeader),
            "random_each_cycle" => Ok(Self::RandomEachCycle),
            "opposing" => Ok(Self::Opposing),
            other => Err(format!("unknown herding mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerdingPolicy {
    pub mode: HerdingMode,
    /// w′
    pub amplified_weight: f64,
    /// r′
    pub amplified_sih: f64,
    pub target_population: usize,
    /// Population whose mean heading is inverted (OPPOSING only).
    pub opposing_source: usize,
    /// Leader for FIXED_LEADER; drawn at run start when absent.
    pub fixed_leader_id: Option<AgentId>,
}

impl HerdingPolicy {
    pub fn off() -> Self {
        Self {
            mode: HerdingMode::Off,
            amplified_weight: 10.0,
            amplified_sih: 10.0,
            target_population: 0,
            opposing_source: 0,
            fixed_leader_id: None,
        }
    }

    pub fn new(mode: HerdingMode, amplified_weight: f64, amplified_sih: f64) -> Self {
        Self {
            mode,
            amplified_weight,
            amplified_sih,
            ..Self::off()
        }
    }
}

impl Default for HerdingPolicy {
    fn default() -> Self {
        Self::off()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HerdingError {
    #[error("mean heading of an empty agent set")]
    Empty,
}

/// Normalized mean heading; `Ok(None)` when the headings cancel.
pub fn mean_heading<'a, I>(agents: I) -> Result<Option<BeliefVector>, HerdingError>
where
    I: IntoIterator<Item = &'a Agent>,
{
    let mut iter = agents.into_iter();
    let first = iter.next().ok_or(HerdingError::Empty)?;
    let mut sum = first.orientation;
    let mut count = 1usize;
    for a in iter {
        sum += a.orientation;
        count += 1;
    }
    let mean = sum * (1.0 / count as f64);
    if mean.norm() < DEGENERATE_EPSILON {
        return Ok(None);
    }
    Ok(mean.normalize().ok())
}

/// Agents picked for amplification this step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub picks: Vec<AgentId>,
    /// The mean heading a mode relied on was undefined and a random agent was
    /// picked instead.
    pub fell_back: bool,
}

impl Selection {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(id: AgentId) -> Self {
        Self {
            picks: vec![id],
            fell_back: false,
        }
    }
}

fn best_aligned<'a>(
    members: impl Iterator<Item = &'a Agent>,
    direction: &BeliefVector,
) -> Option<AgentId> {
    let mut best: Option<(f64, AgentId)> = None;
    for a in members {
        let score = a.orientation.dot(direction);
        let better = match best {
            None => true,
            Some((s, id)) => score > s || (score == s && a.id < id),
        };
        if better {
            best = Some((score, a.id));
        }
    }
    best.map(|(_, id)| id)
}

fn random_member<R: Rng + ?Sized>(snapshot: &[Agent], population: usize, rng: &mut R) -> Option<AgentId> {
    let count = snapshot.iter().filter(|a| a.population == population).count();
    if count == 0 {
        return None;
    }
    let k = rng.random_range(0..count);
    snapshot
        .iter()
        .filter(|a| a.population == population)
        .nth(k)
        .map(|a| a.id)
}

/// Agent in `population` whose heading best matches the population mean.
fn closest_to_mean<R: Rng + ?Sized>(
    snapshot: &[Agent],
    population: usize,
    rng: &mut R,
    fell_back: &mut bool,
) -> Option<AgentId> {
    let members = || snapshot.iter().filter(move |a| a.population == population);
    match mean_heading(members()) {
        Ok(Some(mean)) => best_aligned(members(), &mean),
        Ok(None) => {
            *fell_back = true;
            random_member(snapshot, population, rng)
        }
        Err(_) => None,
    }
}

/// Chooses the agent(s) to amplify for the coming step.
///
/// `leader` is the run's FIXED_LEADER choice. OPPOSING picks one agent in
/// each of the two populations: the source population's best match to its own
/// mean, and the target population's best match to the inverse of it.
pub fn select_amplified<R: Rng + ?Sized>(
    policy: &HerdingPolicy,
    snapshot: &[Agent],
    leader: Option<AgentId>,
    rng: &mut R,
) -> Selection {
    let target = policy.target_population;
    let mut fell_back = false;
    let picks: Vec<AgentId> = match policy.mode {
        HerdingMode::Off => Vec::new(),
        HerdingMode::ClosestToMean => {
            closest_to_mean(snapshot, target, rng, &mut fell_back).into_iter().collect()
        }
        HerdingMode::FixedLeader => leader
            .filter(|&id| (id as usize) < snapshot.len())
            .into_iter()
            .collect(),
        HerdingMode::RandomEachCycle => random_member(snapshot, target, rng).into_iter().collect(),
        HerdingMode::Opposing => {
            let source = policy.opposing_source;
            let mut picks = Vec::with_capacity(2);
            if source != target {
                picks.extend(closest_to_mean(snapshot, source, rng, &mut fell_back));
            }
            let sources = snapshot.iter().filter(|a| a.population == source);
            let opposed = match mean_heading(sources) {
                Ok(Some(mean)) => {
                    best_aligned(snapshot.iter().filter(|a| a.population == target), &(-mean))
                }
                _ => {
                    fell_back = true;
                    random_member(snapshot, target, rng)
                }
            };
            picks.extend(opposed);
            picks
        }
    };
    Selection { picks, fell_back }
}

/// Restores every previously amplified agent not in `selection` and
/// amplifies the selected ones.
pub fn apply_amplification(agents: &mut [Agent], selection: &Selection, policy: &HerdingPolicy) {
    for a in agents.iter_mut() {
        if a.amplified && !selection.picks.contains(&a.id) {
            a.restore();
        }
    }
    for &id in &selection.picks {
        if let Some(a) = agents.get_mut(id as usize) {
            a.weight = policy.amplified_weight;
            a.sih = policy.amplified_sih;
            a.amplified = true;
        }
    }
}
