//! Build a config from TOML text, step a world by hand and write a
//! trajectory CSV.
//!
//!     cargo run --example custom_config

use beliefsim::harness::io::write_trajectory_csv;
use beliefsim::harness::{parse_config, simulate};

const CONFIG: &str = r#"
dimensions = 3
extent = 8.0
border = "respawn"
init_half_range = 4.0
total_steps = 300
sample_every = 30
repetitions = 1
base_seed = 42

[herding]
mode = "closest_to_mean"
amplified_weight = 5.0
amplified_sih = 8.0

[[populations]]
count = 40
sih = 0.5
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = parse_config(CONFIG)?;
    println!("config digest {}", config.digest());

    let mut world = beliefsim::dynamics::World::new(config.world_config(), config.base_seed)?;
    world.run(100);
    let amplified = world.agents().iter().filter(|a| a.amplified).count();
    println!("after 100 steps: t = {:.1}s, {amplified} amplified agent(s)", world.sim_time());

    let out = simulate(&config, config.base_seed, "custom")?;
    let path = std::env::temp_dir().join("beliefsim-custom_trajectory.csv");
    write_trajectory_csv(&path, &out.run_id, &config.header_entries(), &out.frames)?;
    println!("{} frames written to {}", out.frames.len(), path.display());
    Ok(())
}
