//! The same population in two and four dimensions, with and without scaling
//! the horizon by the square root of the dimension count.
//!
//!     cargo run --release --example dimension_scaling -- [sih] [seeds]

use beliefsim::analytics::Dtw;
use beliefsim::dynamics::effective_sih;
use beliefsim::harness::{mean_social_distance, preset, simulate, SweepParam};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sih: f64 = args.next().map_or(Ok(1.6), |a| a.parse())?;
    let seeds: u64 = args.next().map_or(Ok(2), |a| a.parse())?;

    for (dims, scaled) in [(2, false), (4, false), (4, true)] {
        let mut config = preset("phases-2d").expect("bundled");
        config.total_steps = 1000;
        config = SweepParam::Dimensions.apply(&config, dims as f64)?;
        config = SweepParam::Sih.apply(&config, sih)?;
        config.sqrt_dim_scaling = scaled;
        let horizon = config.world_config().populations[0].sih;
        let mut total = 0.0;
        for seed in 1..=seeds {
            total += mean_social_distance(&simulate(&config, seed, "dims")?.trajectories(), &Dtw::new())?;
        }
        println!(
            "d={dims} scaled={scaled:<5} horizon {horizon:.3} (sqrt rule gives {:.3})  mean distance {:.0}",
            effective_sih(sih, dims),
            total / seeds as f64
        );
    }
    Ok(())
}
