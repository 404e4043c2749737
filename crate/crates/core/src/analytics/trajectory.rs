use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::dynamics::AgentId;
use crate::vector::BeliefVector;

/// Which sampled series DTW compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryFeature {
    #[default]
    Position,
    Heading,
}

/// Time-ordered samples of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub agent_id: AgentId,
    pub population: usize,
    /// Seconds between consecutive samples.
    pub sample_period: f64,
    pub positions: Vec<BeliefVector>,
    /// Headings at the same instants; may be empty.
    pub headings: Vec<BeliefVector>,
}

impl Trajectory {
    pub fn new(
        agent_id: AgentId,
        population: usize,
        sample_period: f64,
        positions: Vec<BeliefVector>,
    ) -> Result<Self, AnalyticsError> {
        let t = Self {
            agent_id,
            population,
            sample_period,
            positions,
            headings: Vec::new(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_headings(mut self, headings: Vec<BeliefVector>) -> Result<Self, AnalyticsError> {
        self.headings = headings;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        let first = self
            .positions
            .first()
            .ok_or(AnalyticsError::EmptyTrajectory(self.agent_id))?;
        let d = first.len();
        for v in self.positions.iter().chain(&self.headings) {
            if v.len() != d {
                return Err(AnalyticsError::DimensionMismatch(d, v.len()));
            }
        }
        if !self.headings.is_empty() && self.headings.len() != self.positions.len() {
            return Err(AnalyticsError::MissingHeadings(self.agent_id));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dimensions(&self) -> usize {
        self.positions.first().map_or(0, |p| p.len())
    }

    pub fn series(&self, feature: TrajectoryFeature) -> Result<&[BeliefVector], AnalyticsError> {
        match feature {
            TrajectoryFeature::Position => Ok(&self.positions),
            TrajectoryFeature::Heading if self.headings.is_empty() => {
                Err(AnalyticsError::MissingHeadings(self.agent_id))
            }
            TrajectoryFeature::Heading => Ok(&self.headings),
        }
    }

    /// Keeps only samples `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            agent_id: self.agent_id,
            population: self.population,
            sample_period: self.sample_period,
            positions: self.positions[range.clone()].to_vec(),
            headings: if self.headings.is_empty() {
                Vec::new()
            } else {
                self.headings[range].to_vec()
            },
        }
    }
}
