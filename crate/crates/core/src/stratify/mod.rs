//! Per-sample strata: trajectory type and Kalman difficulty.

mod bins;
pub mod kalman;
mod profile;
pub mod taxonomy;

use serde::Serialize;
use thiserror::Error;

pub use bins::{difficulty_bin, DifficultyBins};
pub use kalman::{kalman_difficulty, kalman_fit_predict, KalmanForecast, KalmanParams};
pub use profile::{profile_dataset, profile_samples, DatasetProfile, HistogramBin, TypeShare};
pub use taxonomy::{classify_trajectory, TrajectoryType};

use crate::preprocess::UnifiedSample;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StratifyError {
    #[error("need at least 2 valid history steps, found {0}")]
    InsufficientHistory(usize),
    #[error("no valid future step")]
    EmptyFuture,
    #[error("Kalman parameters must be finite and positive")]
    InvalidParams,
    #[error("invalid difficulty bins: {0}")]
    InvalidEdges(String),
    #[error("dataset is empty")]
    EmptyCache,
    #[error(transparent)]
    Cache(#[from] crate::io::CacheError),
}

/// Strata of one sample. `kalman_difficulty` is `None` when the history is
/// too short to fit the filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumLabel {
    pub traj_type: TrajectoryType,
    pub kalman_difficulty: Option<f64>,
    pub difficulty_bin: Option<usize>,
}

pub fn sample_trajectory_type(sample: &UnifiedSample) -> Result<TrajectoryType, StratifyError> {
    classify_trajectory(
        &sample.gt_future,
        &sample.gt_mask,
        &sample.gt_future_heading,
        &sample.gt_future_speed,
        0.0,
    )
}

pub fn sample_kalman_difficulty(
    sample: &UnifiedSample,
    params: &KalmanParams,
) -> Result<f64, StratifyError> {
    let forecast = kalman_fit_predict(
        &sample.history_xy,
        &sample.focal_mask,
        sample.future_len,
        params,
    )?;
    kalman_difficulty(&sample.gt_future, &sample.gt_mask, &forecast.positions)
}

pub fn label_sample(
    sample: &UnifiedSample,
    params: &KalmanParams,
    bins: &DifficultyBins,
) -> Result<StratumLabel, StratifyError> {
    let traj_type = sample_trajectory_type(sample)?;
    let kalman_difficulty = match sample_kalman_difficulty(sample, params) {
        Ok(d) => Some(d),
        Err(StratifyError::InsufficientHistory(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(StratumLabel {
        traj_type,
        kalman_difficulty,
        difficulty_bin: kalman_difficulty.map(|d| bins.bin_index(d)),
    })
}
