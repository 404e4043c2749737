use serde::{Deserialize, Serialize};

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PhaseLabel {
    Nomad,
    Flock,
    Stampede,
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Nomad => "NOMAD",
            Self::Flock => "FLOCK",
            Self::Stampede => "STAMPEDE",
        })
    }
}

/// One run's mean social distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDistance {
    pub run_id: String,
    pub sih: f64,
    pub mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseClassification {
    /// Label for each input run, in input order.
    pub labels: Vec<PhaseLabel>,
    /// `[min, max]` of the stampede, flock and nomad bands, in that order.
    pub bands: [[f64; 2]; 3],
    /// Midpoints of the two gaps: stampede/flock and flock/nomad.
    pub boundaries: [f64; 2],
    /// Smallest gap between adjacent bands over the widest band.
    pub separation: f64,
}

impl PhaseClassification {
    /// Label a new distance against the fitted boundaries.
    pub fn label_for(&self, distance: f64) -> PhaseLabel {
        if distance < self.boundaries[0] {
            PhaseLabel::Stampede
        } else if distance < self.boundaries[1] {
            PhaseLabel::Flock
        } else {
            PhaseLabel::Nomad
        }
    }
}

/// Smallest gap between adjacent bands divided by the largest band range.
///
/// Bands are ordered by their minimum first. Overlapping bands give a
/// negative score; zero-width bands with positive gaps give infinity.
pub fn separation_score(bands: &[Vec<f64>]) -> f64 {
    let mut ranges: Vec<(f64, f64)> = bands
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| {
            let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();
    if ranges.len() < 2 {
        return f64::NAN;
    }
    ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let min_gap = ranges
        .windows(2)
        .map(|w| w[1].0 - w[0].1)
        .fold(f64::INFINITY, f64::min);
    let max_spread = ranges.iter().map(|r| r.1 - r.0).fold(0.0, f64::max);
    if max_spread == 0.0 {
        if min_gap > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        min_gap / max_spread
    }
}

/// Optimal partition of sorted `xs` into `k` contiguous groups by squared
/// error. Returns the start index of each group.
fn optimal_partition(xs: &[f64], k: usize) -> Vec<usize> {
    let n = xs.len();
    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    for (i, &x) in xs.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
        prefix_sq[i + 1] = prefix_sq[i] + x * x;
    }
    // Squared error of xs[i..j].
    let sse = |i: usize, j: usize| {
        let len = (j - i) as f64;
        let s = prefix[j] - prefix[i];
        (prefix_sq[j] - prefix_sq[i] - s * s / len).max(0.0)
    };
    // cost[c][j]: best cost splitting xs[..j] into c + 1 groups.
    let mut cost = vec![vec![f64::INFINITY; n + 1]; k];
    let mut split = vec![vec![0usize; n + 1]; k];
    for j in 1..=n {
        cost[0][j] = sse(0, j);
    }
    for c in 1..k {
        for j in (c + 1)..=n {
            for i in c..j {
                let v = cost[c - 1][i] + sse(i, j);
                if v < cost[c][j] {
                    cost[c][j] = v;
                    split[c][j] = i;
                }
            }
        }
    }
    let mut starts = vec![0; k];
    let mut j = n;
    for c in (1..k).rev() {
        let i = split[c][j];
        starts[c] = i;
        j = i;
    }
    starts
}

/// Splits runs into three bands by their mean social distance: the highest
/// band is NOMAD, the lowest STAMPEDE and the middle FLOCK.
pub fn classify_phases(runs: &[RunDistance]) -> Result<PhaseClassification, AnalyticsError> {
    if runs.len() < 3 {
        return Err(AnalyticsError::InsufficientData);
    }
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].mean_distance.total_cmp(&runs[b].mean_distance));
    let sorted: Vec<f64> = order.iter().map(|&i| runs[i].mean_distance).collect();
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(AnalyticsError::Degenerate);
    }

    let starts = optimal_partition(&sorted, 3);
    let ends = [starts[1], starts[2], sorted.len()];
    let phase_of_group = [PhaseLabel::Stampede, PhaseLabel::Flock, PhaseLabel::Nomad];
    let mut labels = vec![PhaseLabel::Flock; runs.len()];
    let mut bands = [[0.0; 2]; 3];
    let mut groups: Vec<Vec<f64>> = Vec::with_capacity(3);
    for g in 0..3 {
        let members = &sorted[starts[g]..ends[g]];
        bands[g] = [members[0], members[members.len() - 1]];
        groups.push(members.to_vec());
        for &idx in &order[starts[g]..ends[g]] {
            labels[idx] = phase_of_group[g];
        }
    }
    let boundaries = [
        0.5 * (bands[0][1] + bands[1][0]),
        0.5 * (bands[1][1] + bands[2][0]),
    ];
    Ok(PhaseClassification {
        labels,
        bands,
        boundaries,
        separation: separation_score(&groups),
    })
}
