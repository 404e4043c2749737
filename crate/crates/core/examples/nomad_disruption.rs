//! Ten zero-horizon nomads mixed into ninety stampeders, against an
//! all-stampeder control on the same seeds.
//!
//!     cargo run --release --example nomad_disruption -- [seeds]

use beliefsim::harness::{preset, simulate_with, ExperimentConfig};

/// Wall events per 1000 steps per stampeder, and mean centroid distance.
fn measure(config: &ExperimentConfig, seed: u64) -> Result<(f64, f64), beliefsim::ConfigError> {
    let members = config.world.populations[0].count as f64;
    let mut events = 0usize;
    let mut distance = 0.0;
    simulate_with(config, seed, "nomads", |w| {
        events += w.events().iter().filter(|e| e.population == 0).count();
        let mut c = beliefsim::BeliefVector::zeros(w.config().dimensions);
        for a in w.agents().iter().filter(|a| a.population == 0) {
            c += a.position;
        }
        distance += c.norm() / members;
    })?;
    let steps = config.total_steps as f64;
    Ok((events as f64 * 1000.0 / steps / members, distance / steps))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds: u64 = std::env::args().nth(1).map_or(Ok(5), |a| a.parse())?;
    let mix = preset("nomad-mix").expect("bundled");
    let mut control = mix.clone();
    control.world.populations.truncate(1);
    control.world.populations[0].count = mix.world.agent_count();

    println!("{:>4}  {:>14}  {:>14}  {:>10}  {:>10}", "seed", "events (mix)", "events (ctl)", "dist (mix)", "dist (ctl)");
    for seed in 1..=seeds {
        let (em, dm) = measure(&mix, seed)?;
        let (ec, dc) = measure(&control, seed)?;
        println!("{seed:>4}  {em:>14.2}  {ec:>14.2}  {dm:>10.2}  {dc:>10.2}");
    }
    Ok(())
}
