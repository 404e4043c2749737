use serde::{Deserialize, Serialize};

use super::{AnalyticsError, Trajectory};
use crate::vector::BeliefVector;

/// Per-sample population summaries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timelines {
    /// Mean distance of the agents from the origin.
    pub mean_distance: Vec<f64>,
    /// Mean angle (radians) between each heading and the population mean heading.
    pub heading_deviation: Vec<f64>,
}

/// Mean angle between each heading and their normalized mean. When the
/// headings cancel exactly the mean is undefined and π/2 is returned.
pub fn mean_angular_deviation<'a, I>(headings: I) -> f64
where
    I: IntoIterator<Item = &'a BeliefVector> + Clone,
{
    let mut iter = headings.clone().into_iter();
    let Some(first) = iter.next() else {
        return 0.0;
    };
    let mut sum = *first;
    let mut count = 1usize;
    for h in iter {
        sum += *h;
        count += 1;
    }
    let Ok(mean) = sum.normalize() else {
        return std::f64::consts::FRAC_PI_2;
    };
    headings.into_iter().map(|h| h.angle_to(&mean)).sum::<f64>() / count as f64
}

/// Distance-from-origin and heading-convergence timelines over equally
/// sampled trajectories. Heading deviation is empty when the trajectories
/// carry no headings.
pub fn run_statistics(trajectories: &[Trajectory]) -> Result<Timelines, AnalyticsError> {
    let Some(first) = trajectories.first() else {
        return Ok(Timelines::default());
    };
    let samples = first.len();
    for t in trajectories {
        t.validate()?;
        if t.len() != samples {
            return Err(AnalyticsError::DimensionMismatch(samples, t.len()));
        }
    }
    let n = trajectories.len() as f64;
    let mean_distance = (0..samples)
        .map(|k| trajectories.iter().map(|t| t.positions[k].norm()).sum::<f64>() / n)
        .collect();
    let with_headings = trajectories.iter().all(|t| !t.headings.is_empty());
    let heading_deviation = if with_headings {
        (0..samples)
            .map(|k| {
                let hs: Vec<BeliefVector> = trajectories.iter().map(|t| t.headings[k]).collect();
                mean_angular_deviation(&hs)
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(Timelines {
        mean_distance,
        heading_deviation,
    })
}
