//! Compare the herding modes by mean DTW social distance at a low horizon.
//! Lower distance means more clustered, stampede-like motion.
//!
//!     cargo run --release --example herding -- [sih] [seeds]

use beliefsim::analytics::Dtw;
use beliefsim::harness::{mean_social_distance, preset, simulate, SweepParam};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sih: f64 = args.next().map_or(Ok(0.2), |a| a.parse())?;
    let seeds: u64 = args.next().map_or(Ok(3), |a| a.parse())?;

    for name in ["herding-control", "herding-fixed", "herding-closest", "herding-random"] {
        let config = SweepParam::Sih.apply(&preset(name).expect("bundled"), sih)?;
        let mut total = 0.0;
        let mut respawns = 0;
        for seed in 1..=seeds {
            let out = simulate(&config, seed, name)?;
            total += mean_social_distance(&out.trajectories(), &Dtw::new())?;
            respawns += out.event_count(beliefsim::dynamics::BoundaryKind::Respawned);
        }
        println!(
            "{name:<16} mode {:<18} mean distance {:>8.0}  respawns/run {:>6.0}",
            format!("{:?}", config.world.herding.mode),
            total / seeds as f64,
            respawns as f64 / seeds as f64
        );
    }
    Ok(())
}
