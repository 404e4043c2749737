//! Batch pipeline: write runs to disk, then analyze the directory into DTW
//! matrices, per-agent social distances and a phase summary.
//!
//!     cargo run --release --example dtw_analysis -- [out-dir]

use std::path::PathBuf;

use beliefsim::harness::{analyze_dir, preset, sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("beliefsim-dtw"), PathBuf::from);
    let mut config = preset("phases-2d").expect("bundled");
    config.total_steps = 600;
    config.repetitions = 2;

    let records = sweep(&config, "sih", &[0.0, 0.4, 10.0], &out)?;
    println!("wrote {} runs under {}", records.len(), out.display());

    let summary = analyze_dir(&out, Some(10))?;
    for row in &summary.rows {
        let label = row.phase.map_or("-".to_string(), |p| p.to_string());
        println!("{:<24} sih {:>5}  distance {:>8.0}  {label}", row.run_id, row.sih, row.mean_distance);
    }
    println!("summary: {}", summary.summary_path.display());
    Ok(())
}
