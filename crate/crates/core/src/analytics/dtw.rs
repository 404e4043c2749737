use super::{AnalyticsError, Trajectory, TrajectoryFeature};
use crate::vector::BeliefVector;

/// Exact dynamic time warping with Euclidean point cost.
///
/// Paths are anchored at both ends and move by match, insertion or deletion.
/// The returned cost is the plain sum along the best path, not normalized.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dtw {
    window: Option<usize>,
    feature: TrajectoryFeature,
}

impl Dtw {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sakoe-Chiba band of half-width `window` (widened to at least `|n - m|`
    /// so the end cell stays reachable).
    pub fn with_window(mut self, window: usize) -> Self {
        self.window = Some(window);
        self
    }

    pub fn with_feature(mut self, feature: TrajectoryFeature) -> Self {
        self.feature = feature;
        self
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    pub fn feature(&self) -> TrajectoryFeature {
        self.feature
    }

    pub fn distance(&self, a: &Trajectory, b: &Trajectory) -> Result<f64, AnalyticsError> {
        self.distance_series(a.series(self.feature)?, b.series(self.feature)?)
    }

    pub fn distance_series(
        &self,
        a: &[BeliefVector],
        b: &[BeliefVector],
    ) -> Result<f64, AnalyticsError> {
        let (n, m) = (a.len(), b.len());
        if n == 0 || m == 0 {
            return Err(AnalyticsError::EmptyTrajectory(0));
        }
        if a[0].len() != b[0].len() {
            return Err(AnalyticsError::DimensionMismatch(a[0].len(), b[0].len()));
        }
        let window = self.window.map(|w| w.max(n.abs_diff(m)));

        // Two rolling rows over b; index 0 is the virtual boundary column.
        let mut prev = vec![f64::INFINITY; m + 1];
        let mut curr = vec![f64::INFINITY; m + 1];
        prev[0] = 0.0;
        for i in 1..=n {
            curr.fill(f64::INFINITY);
            let (lo, hi) = match window {
                Some(w) => (i.saturating_sub(w).max(1), (i + w).min(m)),
                None => (1, m),
            };
            let ai = &a[i - 1];
            for j in lo..=hi {
                let cost = ai.distance(&b[j - 1]);
                let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
                curr[j] = cost + best;
            }
            std::mem::swap(&mut prev, &mut curr);
        }
        Ok(prev[m])
    }
}

/// Unwindowed positional DTW between two trajectories.
pub fn dtw_distance(a: &Trajectory, b: &Trajectory) -> Result<f64, AnalyticsError> {
    Dtw::new().distance(a, b)
}
