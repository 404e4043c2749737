//! Bundled experiment configs, loadable as `preset:<name>`.

use super::config::{parse_config, ExperimentConfig};

const PRESETS: &[(&str, &str)] = &[
    ("phases-2d", include_str!("../../presets/phases-2d.toml")),
    ("phases-4d", include_str!("../../presets/phases-4d.toml")),
    ("stampede-2d", include_str!("../../presets/stampede-2d.toml")),
    ("stampede-runaway", include_str!("../../presets/stampede-runaway.toml")),
    ("nomad-mix", include_str!("../../presets/nomad-mix.toml")),
    ("herding-control", include_str!("../../presets/herding-control.toml")),
    ("herding-closest", include_str!("../../presets/herding-closest.toml")),
    ("herding-fixed", include_str!("../../presets/herding-fixed.toml")),
    ("herding-random", include_str!("../../presets/herding-random.toml")),
    ("opposing", include_str!("../../presets/opposing.toml")),
];

/// Grid of horizons swept by the phase presets.
pub const PHASE_SIH_GRID: [f64; 9] = [0.0, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 10.0];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    preset_source(name).map(|s| parse_config(s).expect("bundled preset is valid"))
}
