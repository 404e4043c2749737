use std::path::{Path, PathBuf};

use super::io::{self, PhaseSummaryRow};
use crate::analytics::{
    classify_phases, pairwise_matrix, social_distance, AnalyticsError, Dtw, PhaseClassification,
    RunDistance, Trajectory,
};
use crate::error::{Error, Result};

/// Mean over agents of each agent's summed DTW distance to all others.
pub fn mean_social_distance(trajectories: &[Trajectory], dtw: &Dtw) -> Result<f64, AnalyticsError> {
    let m = pairwise_matrix(trajectories, dtw)?;
    let sd = social_distance(&m);
    Ok(sd.iter().sum::<f64>() / sd.len() as f64)
}

#[derive(Debug, Clone)]
pub struct AnalysisSummary {
    pub rows: Vec<PhaseSummaryRow>,
    /// `None` when fewer than three runs were found or all distances tie.
    pub classification: Option<PhaseClassification>,
    pub summary_path: PathBuf,
}

fn trajectory_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            trajectory_files(&path, out)?;
        } else if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with("_trajectory.csv"))
        {
            out.push(path);
        }
    }
    Ok(())
}

/// Analyzes every `*_trajectory.csv` under `dir`: writes a DTW matrix and
/// social distances next to each, then `phase_summary.csv` in `dir`.
pub fn analyze_dir(dir: &Path, window: Option<usize>) -> Result<AnalysisSummary> {
    let mut files = Vec::new();
    trajectory_files(dir, &mut files)?;
    files.sort();
    if files.is_empty() {
        return Err(Error::Format {
            path: dir.to_path_buf(),
            message: "no *_trajectory.csv files found".into(),
        });
    }
    let mut dtw = Dtw::new();
    if let Some(w) = window {
        dtw = dtw.with_window(w);
    }

    let mut runs = Vec::with_capacity(files.len());
    for path in &files {
        let file = io::read_trajectory_csv(path)?;
        let stem = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix("_trajectory.csv"))
            .unwrap_or("run");
        let parent = path.parent().unwrap_or(dir);
        let matrix = pairwise_matrix(&file.trajectories, &dtw)?;
        let social = social_distance(&matrix);
        io::write_matrix_csv(&parent.join(format!("{stem}_dtw.csv")), &matrix)?;
        io::write_social_distance_csv(
            &parent.join(format!("{stem}_social.csv")),
            &file.trajectories,
            &social,
        )?;
        let run_id = match parent.strip_prefix(dir) {
            Ok(rel) if !rel.as_os_str().is_empty() => format!("{}/{}", rel.display(), stem),
            _ => stem.to_string(),
        };
        runs.push(RunDistance {
            run_id,
            sih: file.header_f64("sih.0").unwrap_or(f64::NAN),
            mean_distance: social.iter().sum::<f64>() / social.len() as f64,
        });
    }

    let classification = match classify_phases(&runs) {
        Ok(c) => Some(c),
        Err(e @ (AnalyticsError::InsufficientData | AnalyticsError::Degenerate)) => {
            log::warn!("phase classification skipped: {e}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let rows: Vec<PhaseSummaryRow> = runs
        .into_iter()
        .enumerate()
        .map(|(i, r)| PhaseSummaryRow {
            run_id: r.run_id,
            sih: r.sih,
            mean_distance: r.mean_distance,
            phase: classification.as_ref().map(|c| c.labels[i]),
            separation: classification.as_ref().map_or(f64::NAN, |c| c.separation),
        })
        .collect();
    let summary_path = dir.join("phase_summary.csv");
    io::write_phase_summary_csv(&summary_path, &rows)?;
    Ok(AnalysisSummary {
        rows,
        classification,
        summary_path,
    })
}
