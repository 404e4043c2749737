use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::io;
use crate::analytics::Trajectory;
use crate::dynamics::{Agent, BoundaryEvent, BoundaryKind, Heatmap, LogEntry, World};
use crate::error::{ConfigError, Error, Result};

/// Agent states at one sampled step.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: u64,
    pub time: f64,
    pub agents: Vec<Agent>,
}

/// Everything a single in-memory run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub run_id: String,
    pub seed: u64,
    /// Step 0 and every `sample_every` steps after it.
    pub frames: Vec<Frame>,
    pub events: Vec<BoundaryEvent>,
    pub heatmap: Heatmap,
    pub log: Vec<LogEntry>,
}

impl RunOutput {
    /// Per-agent trajectories over the sampled frames, ordered by agent id.
    pub fn trajectories(&self) -> Vec<Trajectory> {
        let Some(first) = self.frames.first() else {
            return Vec::new();
        };
        let period = match self.frames.as_slice() {
            [a, b, ..] => b.time - a.time,
            _ => 0.0,
        };
        (0..first.agents.len())
            .map(|i| Trajectory {
                agent_id: first.agents[i].id,
                population: first.agents[i].population,
                sample_period: period,
                positions: self.frames.iter().map(|f| f.agents[i].position).collect(),
                headings: self.frames.iter().map(|f| f.agents[i].orientation).collect(),
            })
            .collect()
    }

    pub fn event_count(&self, kind: BoundaryKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

/// Runs one seeded simulation in memory.
pub fn simulate(config: &ExperimentConfig, seed: u64, run_id: &str) -> Result<RunOutput, ConfigError> {
    simulate_with(config, seed, run_id, |_| {})
}

/// Like [`simulate`], calling `on_step` with the world after every step.
pub fn simulate_with(
    config: &ExperimentConfig,
    seed: u64,
    run_id: &str,
    mut on_step: impl FnMut(&World),
) -> Result<RunOutput, ConfigError> {
    config.validate()?;
    let mut world = World::new(config.world_config(), seed)?;
    let capture = |w: &World| Frame {
        step: w.step_index(),
        time: w.sim_time(),
        agents: w.agents().to_vec(),
    };
    let mut frames = Vec::with_capacity((config.total_steps / config.sample_every + 1) as usize);
    frames.push(capture(&world));
    let mut events = Vec::new();
    for _ in 0..config.total_steps {
        world.step();
        events.extend_from_slice(world.events());
        on_step(&world);
        if world.step_index() % config.sample_every == 0 {
            frames.push(capture(&world));
        }
    }
    Ok(RunOutput {
        run_id: run_id.to_string(),
        seed,
        frames,
        events,
        heatmap: world.environment().heatmap.clone(),
        log: world.log().to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config_digest: String,
    pub seed: u64,
    /// `param=value` label when the run belongs to a sweep.
    pub group: Option<String>,
    pub trajectory_path: PathBuf,
    pub events_path: PathBuf,
    pub heatmap_path: PathBuf,
    pub wall_clock_secs: f64,
    pub reflected: usize,
    pub respawned: usize,
}

fn write_run(
    config: &ExperimentConfig,
    out: &RunOutput,
    dir: &Path,
    group: Option<&str>,
    elapsed: f64,
) -> Result<RunRecord> {
    let mut header = vec![
        ("run_id".to_string(), out.run_id.clone()),
        ("seed".to_string(), out.seed.to_string()),
    ];
    header.extend(config.header_entries());
    let trajectory_path = dir.join(format!("{}_trajectory.csv", out.run_id));
    let events_path = dir.join(format!("{}_events.csv", out.run_id));
    let heatmap_path = dir.join(format!("{}_heatmap.csv", out.run_id));
    io::write_trajectory_csv(&trajectory_path, &out.run_id, &header, &out.frames)?;
    io::write_events_csv(&events_path, &out.run_id, &header, &out.events)?;
    io::write_heatmap_csv(&heatmap_path, &header, &out.heatmap, config.world.dimensions)?;
    for entry in &out.log {
        log::info!("{} step {}: {}", out.run_id, entry.step, entry.message);
    }
    Ok(RunRecord {
        run_id: out.run_id.clone(),
        config_digest: config.digest(),
        seed: out.seed,
        group: group.map(str::to_string),
        trajectory_path,
        events_path,
        heatmap_path,
        wall_clock_secs: elapsed,
        reflected: out.event_count(BoundaryKind::Reflected),
        respawned: out.event_count(BoundaryKind::Respawned),
    })
}

fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record([
        "run_id",
        "group",
        "seed",
        "config_digest",
        "trajectory",
        "events",
        "heatmap",
        "wall_clock_secs",
        "reflected",
        "respawned",
    ])
    .map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.write_record([
            r.run_id.clone(),
            r.group.clone().unwrap_or_default(),
            r.seed.to_string(),
            r.config_digest.clone(),
            r.trajectory_path.display().to_string(),
            r.events_path.display().to_string(),
            r.heatmap_path.display().to_string(),
            format!("{:.3}", r.wall_clock_secs),
            r.reflected.to_string(),
            r.respawned.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn run_group(
    config: &ExperimentConfig,
    base_seed: u64,
    dir: &Path,
    group: Option<&str>,
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config.to_toml()).map_err(|e| Error::io(&config_path, e))?;
    (0..config.repetitions)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i as u64);
            let run_id = format!("run{i:03}");
            let started = Instant::now();
            let out = simulate(config, seed, &run_id)?;
            write_run(config, &out, dir, group, started.elapsed().as_secs_f64())
        })
        .collect()
}

/// Runs `config.repetitions` simulations with seeds `seed, seed+1, ...`
/// (default `config.base_seed`) and writes their CSVs under `dir`.
pub fn run_experiment(config: &ExperimentConfig, seed: Option<u64>, dir: &Path) -> Result<Vec<RunRecord>> {
    let records = run_group(config, seed.unwrap_or(config.base_seed), dir, None)?;
    write_records(&dir.join("runs.csv"), &records)?;
    Ok(records)
}

/// Numeric config fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Every population's horizon.
    Sih,
    /// One population's horizon (`sih.<i>`).
    PopulationSih(usize),
    HerdingWeight,
    Dt,
    Dimensions,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sih" => Ok(Self::Sih),
            "herding_weight" => Ok(Self::HerdingWeight),
            "dt" => Ok(Self::Dt),
            "dimensions" => Ok(Self::Dimensions),
            _ => s
                .strip_prefix("sih.")
                .and_then(|i| i.parse().ok())
                .map(Self::PopulationSih)
                .ok_or_else(|| Error::NotSweepable(s.to_string())),
        }
    }
}

impl SweepParam {
    /// A copy of `config` with this parameter set to `value`.
    pub fn apply(self, config: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut c = config.clone();
        match self {
            Self::Sih => c.world.populations.iter_mut().for_each(|p| p.sih = value),
            Self::PopulationSih(i) => {
                let pops = c.world.populations.len();
                c.world
                    .populations
                    .get_mut(i)
                    .ok_or_else(|| ConfigError::invalid(format!("sih.{i}"), format!("only {pops} populations")))?
                    .sih = value;
            }
            Self::HerdingWeight => c.world.herding.amplified_weight = value,
            Self::Dt => c.world.dt = value,
            Self::Dimensions => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(ConfigError::invalid("dimensions", "must be an integer").into());
                }
                c.world.dimensions = value as usize;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// One run group per value, each with the same base seed, in `dir/<param>=<value>/`.
pub fn sweep(config: &ExperimentConfig, param: &str, values: &[f64], dir: &Path) -> Result<Vec<RunRecord>> {
    let p: SweepParam = param.parse()?;
    if values.is_empty() {
        return Err(Error::EmptySweep);
    }
    let configs = values
        .iter()
        .map(|&v| p.apply(config, v).map(|c| (format!("{param}={v}"), c)))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for (label, c) in &configs {
        records.extend(run_group(c, c.base_seed, &dir.join(label), Some(label))?);
    }
    write_records(&dir.join("runs.csv"), &records)?;
    Ok(records)
}

/// Runs `f` on a dedicated rayon pool of `threads` threads.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}
