//! Sweep the horizon over the phase grid and classify each run as nomad,
//! flock or stampede from its mean DTW social distance.
//!
//!     cargo run --release --example phases -- [repetitions] [steps]

use beliefsim::analytics::{classify_phases, Dtw, RunDistance};
use beliefsim::harness::{mean_social_distance, preset, simulate, SweepParam, PHASE_SIH_GRID};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let reps: u64 = args.next().map_or(Ok(3), |a| a.parse())?;
    let steps: u64 = args.next().map_or(Ok(1000), |a| a.parse())?;

    let mut base = preset("phases-2d").expect("bundled");
    base.total_steps = steps;
    let mut runs = Vec::new();
    for sih in PHASE_SIH_GRID {
        let config = SweepParam::Sih.apply(&base, sih)?;
        for seed in 1..=reps {
            let out = simulate(&config, seed, "phases")?;
            let d = mean_social_distance(&out.trajectories(), &Dtw::new())?;
            runs.push(RunDistance {
                run_id: format!("sih{sih}-seed{seed}"),
                sih,
                mean_distance: d,
            });
        }
    }

    let classes = classify_phases(&runs)?;
    println!("{:>6}  {:>10}  label", "sih", "distance");
    for (run, label) in runs.iter().zip(&classes.labels) {
        println!("{:>6}  {:>10.0}  {label}", run.sih, run.mean_distance);
    }
    let [stampede, flock, nomad] = classes.bands;
    println!("bands: stampede {stampede:.0?}  flock {flock:.0?}  nomad {nomad:.0?}");
    println!("separation score {:.3}", classes.separation);
    Ok(())
}
