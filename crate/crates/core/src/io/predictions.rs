//! Prediction files: one JSON object per line,
//! `{"key": "...", "traj": [[[x, y], …] × K], "prob": [p1, …, pK]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PredictionError;

pub const PROB_SUM_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_MODES: usize = 6;

/// K predicted futures (agent frame, meters) with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    #[serde(rename = "key")]
    pub sample_key: String,
    #[serde(rename = "traj")]
    pub trajectories: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "prob")]
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionLimits {
    pub max_modes: usize,
    /// Required number of future steps per mode, when known.
    pub horizon: Option<usize>,
}

impl Default for PredictionLimits {
    fn default() -> Self {
        Self {
            max_modes: DEFAULT_MAX_MODES,
            horizon: None,
        }
    }
}

impl PredictionRecord {
    pub fn num_modes(&self) -> usize {
        self.trajectories.len()
    }

    pub fn horizon(&self) -> usize {
        self.trajectories.first().map_or(0, Vec::len)
    }

    pub fn validate(&self, limits: &PredictionLimits) -> Result<(), PredictionError> {
        let key = || self.sample_key.clone();
        let k = self.num_modes();
        if k == 0 {
            return Err(PredictionError::Shape { key: key(), message: "no modes".into() });
        }
        if k > limits.max_modes {
            return Err(PredictionError::TooManyModes { key: key(), modes: k, max: limits.max_modes });
        }
        if self.probabilities.len() != k {
            return Err(PredictionError::Shape {
                key: key(),
                message: format!("{} probabilities for {k} modes", self.probabilities.len()),
            });
        }
        let t = self.horizon();
        if self.trajectories.iter().any(|m| m.len() != t) {
            return Err(PredictionError::Shape { key: key(), message: "modes differ in length".into() });
        }
        if let Some(h) = limits.horizon {
            if t != h {
                return Err(PredictionError::Shape {
                    key: key(),
                    message: format!("{t} future steps, expected {h}"),
                });
            }
        }
        if self
            .trajectories
            .iter()
            .flatten()
            .any(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(PredictionError::Shape { key: key(), message: "non-finite coordinate".into() });
        }
        let sum: f64 = self.probabilities.iter().sum();
        if self.probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || !((sum - 1.0).abs() <= PROB_SUM_TOL)
        {
            return Err(PredictionError::Probability { key: key(), sum });
        }
        Ok(())
    }
}

pub fn write_prediction_line(rec: &PredictionRecord) -> Vec<u8> {
    serde_json::to_vec(rec).expect("prediction serializes")
}

/// Writes records in key order, one per line.
pub fn write_predictions<'a>(records: impl IntoIterator<Item = &'a PredictionRecord>) -> Vec<u8> {
    let mut sorted: Vec<&PredictionRecord> = records.into_iter().collect();
    sorted.sort_by(|a, b| a.sample_key.cmp(&b.sample_key));
    let mut out = Vec::new();
    for rec in sorted {
        out.extend_from_slice(&write_prediction_line(rec));
        out.push(b'\n');
    }
    out
}

pub fn parse_predictions(
    bytes: &[u8],
    limits: &PredictionLimits,
) -> Result<BTreeMap<String, PredictionRecord>, PredictionError> {
    let mut out = BTreeMap::new();
    for (i, line) in bytes.split(|&b| b == b'\n').enumerate() {
        if line.iter().all(|b| b.is_ascii_whitespace()) {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_slice(line).map_err(|e| {
            PredictionError::Schema {
                line: i + 1,
                message: e.to_string(),
            }
        })?;
        rec.validate(limits)?;
        if out.contains_key(&rec.sample_key) {
            return Err(PredictionError::DuplicateKey(rec.sample_key));
        }
        out.insert(rec.sample_key.clone(), rec);
    }
    Ok(out)
}
