//! Non-learned predictors that emit valid multi-modal prediction records.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::io::{CacheError, CacheReader, PredictionRecord};
use crate::preprocess::features::agent_ch;
use crate::preprocess::UnifiedSample;
use crate::stratify::{kalman_fit_predict, KalmanParams, StratifyError};
use crate::DT;

/// Heading offset between neighbouring fan modes.
pub const FAN_STEP_RAD: f64 = PI / 12.0;
/// Ratio between consecutive mode probabilities before normalization.
pub const PROB_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    ConstantVelocity,
    Kalman,
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cv" => Ok(Self::ConstantVelocity),
            "kalman" => Ok(Self::Kalman),
            other => Err(format!("unknown model {other:?}, expected cv or kalman")),
        }
    }
}

/// `(1, r, r², …)` normalized to sum 1.
pub fn geometric_probabilities(k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|i| PROB_RATIO.powi(i as i32)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / sum).collect()
}

/// Signed fan index of mode `i`: 0, +1, −1, +2, −2, … (positive is left).
fn fan_offset(i: usize) -> f64 {
    let j = i.div_ceil(2) as f64;
    if i % 2 == 1 {
        j
    } else {
        -j
    }
}

fn reference_position(sample: &UnifiedSample) -> [f64; 2] {
    sample.history_xy[sample.past_len - 1]
}

/// Mode 0 continues the reference-step velocity; other modes keep the speed
/// and rotate the heading by multiples of [`FAN_STEP_RAD`].
///
/// The velocity is read from the focal feature row, so a cache built with
/// velocity masked yields stationary forecasts.
pub fn predict_cv(sample: &UnifiedSample, k: usize) -> PredictionRecord {
    let row = sample.focal_row(sample.past_len - 1);
    let (vx, vy) = (row[agent_ch::VX], row[agent_ch::VY]);
    let speed = vx.hypot(vy);
    let heading = vy.atan2(vx);
    let origin = reference_position(sample);
    let trajectories = (0..k)
        .map(|i| {
            let (s, c) = (heading + fan_offset(i) * FAN_STEP_RAD).sin_cos();
            (1..=sample.future_len)
                .map(|t| {
                    let d = speed * t as f64 * DT;
                    [origin[0] + d * c, origin[1] + d * s]
                })
                .collect()
        })
        .collect();
    PredictionRecord {
        sample_key: sample.sample_key.clone(),
        trajectories,
        probabilities: geometric_probabilities(k),
    }
}

/// Mode 0 is the filter forecast; other modes shift it sideways by multiples
/// of the terminal lateral standard deviation, growing linearly to the end
/// of the horizon.
pub fn predict_kalman(
    sample: &UnifiedSample,
    k: usize,
    params: &KalmanParams,
) -> Result<PredictionRecord, StratifyError> {
    let forecast = kalman_fit_predict(
        &sample.history_xy,
        &sample.focal_mask,
        sample.future_len,
        params,
    )?;
    let sigma = forecast.terminal_lateral_std();
    let origin = reference_position(sample);
    let end = forecast.positions.last().copied().unwrap_or(origin);
    let (dx, dy) = (end[0] - origin[0], end[1] - origin[1]);
    let len = dx.hypot(dy);
    let normal = if len > 1e-9 { [-dy / len, dx / len] } else { [0.0, 1.0] };
    let horizon = forecast.positions.len().max(1) as f64;
    let trajectories = (0..k)
        .map(|i| {
            let off = fan_offset(i) * sigma;
            forecast
                .positions
                .iter()
                .enumerate()
                .map(|(t, p)| {
                    let w = off * (t + 1) as f64 / horizon;
                    [p[0] + w * normal[0], p[1] + w * normal[1]]
                })
                .collect()
        })
        .collect();
    Ok(PredictionRecord {
        sample_key: sample.sample_key.clone(),
        trajectories,
        probabilities: geometric_probabilities(k),
    })
}

pub fn predict(
    model: Baseline,
    sample: &UnifiedSample,
    k: usize,
    params: &KalmanParams,
) -> Result<PredictionRecord, StratifyError> {
    match model {
        Baseline::ConstantVelocity => Ok(predict_cv(sample, k)),
        Baseline::Kalman => predict_kalman(sample, k, params),
    }
}

/// Predictions for every cache sample, in cache order, and the number of
/// samples where the Kalman model lacked history and fell back to
/// constant velocity.
pub fn predict_cache(
    cache: &CacheReader,
    model: Baseline,
    k: usize,
    params: &KalmanParams,
) -> Result<(Vec<PredictionRecord>, usize), CacheError> {
    let out = crate::map_indices(cache.len(), |i| {
        let sample = cache.get(i)?;
        Ok::<_, CacheError>(match predict(model, &sample, k, params) {
            Ok(r) => (r, false),
            Err(_) => (predict_cv(&sample, k), true),
        })
    })?;
    let fallbacks = out.iter().filter(|(_, f)| *f).count();
    Ok((out.into_iter().map(|(r, _)| r).collect(), fallbacks))
}
