use std::path::PathBuf;

use beliefsim::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] beliefsim::Error),
    #[error("protocol version {got} is not supported (server speaks {expected})")]
    UnsupportedVersion { got: u32, expected: u32 },
    #[error("malformed message: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("projection dimension {dimension} is out of range for a {dimensions}-dimensional world")]
    Projection { dimension: usize, dimensions: usize },
    #[error("steps_per_second must be finite and > 0, got {0}")]
    Rate(f64),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("the simulation task has stopped")]
    SimulationGone,
}

impl StreamError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = StreamError> = std::result::Result<T, E>;
