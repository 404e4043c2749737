//! Experiment configuration files.
//!
//! Configs are TOML. Only `dimensions` and `populations` (each with `count`
//! and `sih`) are required; everything else falls back to a default. Unknown
//! keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::TrajectoryFeature;
use crate::dynamics::{effective_sih, Border, PopulationConfig, WorldConfig};
use crate::error::{ConfigError, Error, Result};
use crate::herding::{HerdingMode, HerdingPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// World as written in the file (horizons before any dimension scaling).
    pub world: WorldConfig,
    pub total_steps: u64,
    pub sample_every: u64,
    pub repetitions: u32,
    pub base_seed: u64,
    /// Multiply every population horizon by √dimensions when building worlds.
    pub sqrt_dim_scaling: bool,
    pub dtw_window: Option<usize>,
    pub dtw_feature: TrajectoryFeature,
}

impl ExperimentConfig {
    pub fn new(world: WorldConfig) -> Self {
        Self {
            world,
            total_steps: 2000,
            sample_every: 5,
            repetitions: 1,
            base_seed: 1,
            sqrt_dim_scaling: false,
            dtw_window: None,
            dtw_feature: TrajectoryFeature::Position,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.world.validate()?;
        if self.total_steps == 0 {
            return Err(ConfigError::invalid("total_steps", "must be >= 1"));
        }
        if self.sample_every == 0 {
            return Err(ConfigError::invalid("sample_every", "must be >= 1"));
        }
        if self.repetitions == 0 {
            return Err(ConfigError::invalid("repetitions", "must be >= 1"));
        }
        Ok(())
    }

    /// The world actually simulated: horizons scaled by √d when requested.
    pub fn world_config(&self) -> WorldConfig {
        let mut w = self.world.clone();
        if self.sqrt_dim_scaling {
            for p in &mut w.populations {
                p.sih = effective_sih(p.sih, w.dimensions);
            }
        }
        w
    }

    /// Hex SHA-256 of the canonical JSON form. Independent of how the source
    /// file ordered its keys.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(&RawConfig::from(self)).expect("config serializes")
    }

    /// `key=value` lines describing the run tunables, for output headers.
    pub fn header_entries(&self) -> Vec<(String, String)> {
        let w = self.world_config();
        let mut out = vec![
            ("config_digest".into(), self.digest()),
            ("dimensions".into(), w.dimensions.to_string()),
            ("extent".into(), w.extent.to_string()),
            ("border".into(), format!("{:?}", w.border).to_lowercase()),
            ("dt".into(), w.dt.to_string()),
            ("total_steps".into(), self.total_steps.to_string()),
            ("sample_every".into(), self.sample_every.to_string()),
            ("herding".into(), format!("{:?}", w.herding.mode)),
        ];
        for (i, p) in w.populations.iter().enumerate() {
            out.push((format!("sih.{i}"), p.sih.to_string()));
            out.push((format!("count.{i}"), p.count.to_string()));
        }
        out
    }
}

// On-disk form. Every field optional so missing ones can be reported together.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    dimensions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    border: Option<Border>,
    #[serde(skip_serializing_if = "Option::is_none")]
    init_half_range: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cell_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed_adaptation: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_every: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    repetitions: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sqrt_dim_scaling: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analysis: Option<RawAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    herding: Option<RawHerding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    populations: Option<Vec<RawPopulation>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    #[serde(skip_serializing_if = "Option::is_none")]
    dtw_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dtw_feature: Option<TrajectoryFeature>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHerding {
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<HerdingMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplified_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplified_sih: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_population: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    opposing_source: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_leader_id: Option<u32>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPopulation {
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sih: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    turn_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sees_other: Option<bool>,
}

impl From<&ExperimentConfig> for RawConfig {
    fn from(c: &ExperimentConfig) -> Self {
        let w = &c.world;
        let h = &w.herding;
        RawConfig {
            dimensions: Some(w.dimensions),
            extent: Some(w.extent),
            border: Some(w.border),
            init_half_range: Some(w.init_half_range),
            cell_size: Some(w.cell_size),
            dt: Some(w.dt),
            speed_adaptation: Some(w.speed_adaptation),
            total_steps: Some(c.total_steps),
            sample_every: Some(c.sample_every),
            repetitions: Some(c.repetitions),
            base_seed: Some(c.base_seed),
            sqrt_dim_scaling: Some(c.sqrt_dim_scaling),
            analysis: Some(RawAnalysis {
                dtw_window: c.dtw_window,
                dtw_feature: Some(c.dtw_feature),
            }),
            herding: Some(RawHerding {
                mode: Some(h.mode),
                amplified_weight: Some(h.amplified_weight),
                amplified_sih: Some(h.amplified_sih),
                target_population: Some(h.target_population),
                opposing_source: Some(h.opposing_source),
                fixed_leader_id: h.fixed_leader_id,
            }),
            populations: Some(
                w.populations
                    .iter()
                    .map(|p| RawPopulation {
                        count: Some(p.count),
                        sih: Some(p.sih),
                        speed_min: Some(p.speed_min),
                        speed_max: Some(p.speed_max),
                        turn_rate: Some(p.turn_rate),
                        sees_other: Some(p.sees_other),
                    })
                    .collect(),
            ),
        }
    }
}

impl RawConfig {
    fn build(self) -> Result<ExperimentConfig, ConfigError> {
        let mut missing = Vec::new();
        if self.dimensions.is_none() {
            missing.push("dimensions".to_string());
        }
        match &self.populations {
            None => missing.push("populations".to_string()),
            Some(pops) => {
                for (i, p) in pops.iter().enumerate() {
                    if p.count.is_none() {
                        missing.push(format!("populations[{i}].count"));
                    }
                    if p.sih.is_none() {
                        missing.push(format!("populations[{i}].sih"));
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(ConfigError::Missing(missing));
        }

        let populations = self
            .populations
            .unwrap_or_default()
            .into_iter()
            .map(|p| {
                let mut pc = PopulationConfig::new(p.count.unwrap_or(0), p.sih.unwrap_or(0.0));
                pc.speed_min = p.speed_min.unwrap_or(pc.speed_min);
                pc.speed_max = p.speed_max.unwrap_or(pc.speed_max);
                pc.turn_rate = p.turn_rate.unwrap_or(pc.turn_rate);
                pc.sees_other = p.sees_other.unwrap_or(pc.sees_other);
                pc
            })
            .collect();
        let mut world = WorldConfig::new(self.dimensions.unwrap_or(0), populations);
        world.extent = self.extent.unwrap_or(world.extent);
        world.border = self.border.unwrap_or(world.border);
        world.init_half_range = self.init_half_range.unwrap_or(world.init_half_range);
        world.cell_size = self.cell_size.unwrap_or(world.cell_size);
        world.dt = self.dt.unwrap_or(world.dt);
        world.speed_adaptation = self.speed_adaptation.unwrap_or(world.speed_adaptation);

        let h = self.herding.unwrap_or_default();
        world.herding = HerdingPolicy {
            mode: h.mode.unwrap_or(HerdingMode::Off),
            amplified_weight: h.amplified_weight.unwrap_or(10.0),
            amplified_sih: h.amplified_sih.unwrap_or(world.extent),
            target_population: h.target_population.unwrap_or(0),
            opposing_source: h.opposing_source.unwrap_or(0),
            fixed_leader_id: h.fixed_leader_id,
        };

        let mut config = ExperimentConfig::new(world);
        config.total_steps = self.total_steps.unwrap_or(config.total_steps);
        config.sample_every = self.sample_every.unwrap_or(config.sample_every);
        config.repetitions = self.repetitions.unwrap_or(config.repetitions);
        config.base_seed = self.base_seed.unwrap_or(config.base_seed);
        config.sqrt_dim_scaling = self.sqrt_dim_scaling.unwrap_or(false);
        let a = self.analysis.unwrap_or_default();
        config.dtw_window = a.dtw_window;
        config.dtw_feature = a.dtw_feature.unwrap_or_default();
        config.validate()?;
        Ok(config)
    }
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    raw.build()
}

/// Loads a config file. `preset:<name>` loads a bundled preset instead.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("preset:")) {
        return super::presets::preset(name)
            .ok_or_else(|| ConfigError::invalid("preset", format!("unknown preset `{name}`")).into());
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_config(&text)?)
}
