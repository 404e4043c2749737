use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalyticsError, Dtw, Trajectory};
use crate::dynamics::AgentId;

/// Symmetric matrix of pairwise DTW costs with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    ids: Vec<AgentId>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major values, checking shape and symmetry.
    pub fn from_rows(ids: Vec<AgentId>, rows: Vec<Vec<f64>>) -> Result<Self, AnalyticsError> {
        let n = ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(AnalyticsError::DimensionMismatch(n, rows.len()));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(Self { ids, values })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[AgentId] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }
}

/// DTW between every unordered pair, computed once per pair in parallel.
pub fn pairwise_matrix(trajectories: &[Trajectory], dtw: &Dtw) -> Result<DistanceMatrix, AnalyticsError> {
    let n = trajectories.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewTrajectories { needed: 2, got: n });
    }
    let d = trajectories[0].dimensions();
    for t in trajectories {
        t.validate()?;
        if t.dimensions() != d {
            return Err(AnalyticsError::DimensionMismatch(d, t.dimensions()));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let costs = pairs
        .par_iter()
        .map(|&(i, j)| dtw.distance(&trajectories[i], &trajectories[j]))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut values = vec![0.0; n * n];
    for (&(i, j), c) in pairs.iter().zip(costs) {
        values[i * n + j] = c;
        values[j * n + i] = c;
    }
    Ok(DistanceMatrix {
        ids: trajectories.iter().map(|t| t.agent_id).collect(),
        values,
    })
}

/// Column sums: each agent's total DTW distance to every other agent.
pub fn social_distance(matrix: &DistanceMatrix) -> Vec<f64> {
    let n = matrix.len();
    (0..n)
        .map(|j| (0..n).map(|i| matrix.get(i, j)).sum())
        .collect()
}
