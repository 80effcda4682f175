//! Trajectory dataset unification and evaluation toolkit.
//!
//! Heterogeneous driving scenarios are converted into one canonical
//! [`Scenario`] description, turned into agent-centric [`UnifiedSample`]s,
//! scored against multi-modal predictions and stratified by trajectory type
//! and Kalman difficulty.
//!
//! Module map:
//!
//! * [`scenario`] shared domain types and structural validation
//! * [`io`] scenario interchange lines, prediction files, sample cache
//! * [`preprocess`] windowing, agent-frame transform, agent and map features
//! * [`stratify`] trajectory taxonomy, Kalman difficulty, dataset profiles
//! * [`metrics`] minADE, minFDE, miss rate, brier-minFDE and stratified reports
//! * [`baselines`] constant-velocity and Kalman predictors
//! * [`syngen`] procedural scenario generator
//! * [`pipeline`] parallel preprocessing into a cache

// `!(x >= y)` is the NaN-rejecting form used throughout validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod scenario;
pub mod stratify;
pub mod syngen;

pub use preprocess::{PreprocConfig, UnifiedSample};
pub use scenario::{
    wrap_angle, AgentState, AgentTrack, AgentType, LineType, MapPolyline, Scenario,
    TransformRecord, Violation,
};

/// Native sampling rate shared by every scenario, in Hz.
pub const FREQ_HZ: u32 = 10;
/// Step between consecutive timestamps, in seconds.
pub const DT: f64 = 0.1;
/// Longest scenario kept after ingestion, in seconds.
pub const MAX_DURATION_S: f64 = 8.0;
/// Number of timesteps in a full-length scenario.
pub const MAX_STEPS: usize = 81;

/// Maps `f` over `0..n`, on the current rayon pool when the `parallel`
/// feature is enabled. Results are in index order either way.
#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    F: Fn(usize) -> Result<T, E>,
{
    (0..n).map(f).collect()
}
