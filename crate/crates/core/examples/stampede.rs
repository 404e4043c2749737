//! A whole-environment horizon with no border: headings lock together and
//! the cluster runs away from the origin.
//!
//!     cargo run --release --example stampede -- [seed]

use beliefsim::analytics::mean_angular_deviation;
use beliefsim::harness::{preset, simulate_with};
use beliefsim::BeliefVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |a| a.parse())?;
    let config = preset("stampede-runaway").expect("bundled");
    println!("{:>5}  {:>9}  {:>9}", "step", "deviation", "distance");
    simulate_with(&config, seed, "stampede", |w| {
        if w.step_index() % 100 != 0 {
            return;
        }
        let headings: Vec<BeliefVector> = w.agents().iter().map(|a| a.orientation).collect();
        let mut centroid = BeliefVector::zeros(w.config().dimensions);
        for a in w.agents() {
            centroid += a.position;
        }
        let distance = centroid.norm() / w.agents().len() as f64;
        println!("{:>5}  {:>9.4}  {distance:>9.2}", w.step_index(), mean_angular_deviation(&headings));
    })?;
    Ok(())
}
