//! Two populations that cannot see each other. Herding amplifies the agent
//! of the second population that best matches the inverse of the first
//! population's heading, driving the two apart.
//!
//!     cargo run --release --example opposing -- [seed]

use beliefsim::dynamics::World;
use beliefsim::harness::{preset, simulate_with};
use beliefsim::BeliefVector;

fn mean_heading(w: &World, population: usize) -> Option<BeliefVector> {
    let mut sum = BeliefVector::zeros(w.config().dimensions);
    for a in w.agents().iter().filter(|a| a.population == population) {
        sum += a.orientation;
    }
    sum.normalize().ok()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |a| a.parse())?;
    let config = preset("opposing").expect("bundled");
    println!("{:>5}  heading dot (population 0 vs 1)", "step");
    simulate_with(&config, seed, "opposing", |w| {
        if w.step_index() % 100 == 0 {
            if let (Some(a), Some(b)) = (mean_heading(w, 0), mean_heading(w, 1)) {
                println!("{:>5}  {:+.3}", w.step_index(), a.dot(&b));
            }
        }
    })?;
    Ok(())
}
