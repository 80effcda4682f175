//! Scenario → agent-centric sample conversion.
//!
//! The steps are: pick the focal agent's frame at the reference step, cut the
//! history/future windows, encode agent features, clip and resample the map,
//! chunk it, and collect neighbors.

mod config;
pub mod features;
pub mod frame;
pub mod map;
pub mod polyline;
mod sample;
pub mod window;

use thiserror::Error;

pub use config::{ConfigError, MaskedAttribute, PreprocConfig};
pub use features::{agent_features, AGENT_BASE_CHANNELS, MAP_CHANNELS};
pub use frame::to_agent_frame;
pub use map::{build_map_features, chunk_map, MapChunks, MapLine};
pub use polyline::{filter_map, resample_polyline, ResampledPolyline};
pub use sample::{build_sample, sample_key, UnifiedSample};
pub use window::{window_track, TrackWindow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("unknown agent {0:?}")]
    UnknownAgent(String),
    #[error("agent {agent:?} is not valid at reference step {step}")]
    InvalidReferenceStep { agent: String, step: usize },
    #[error("window (past {past}, future {future}) around step {t_ref} does not fit in {steps} steps")]
    WindowOutOfRange {
        t_ref: usize,
        past: usize,
        future: usize,
        steps: usize,
    },
    #[error("polyline too short to resample ({length} m)")]
    DegeneratePolyline { length: f64 },
    #[error("resampling spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("agent {0:?} has no valid future step")]
    EmptyFuture(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
