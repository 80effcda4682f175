//! Multi-modal displacement metrics and stratified evaluation.

mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{
    evaluate, render_table, Coverage, EvalConfig, EvalError, MetricSummary, MetricsReport,
    ReportConfig, SampleRow, StratumSummary, EXPECTED_MODES,
};

use crate::io::PROB_SUM_TOL;

/// Deviation beyond which a sample counts as a miss, in meters.
pub const MISS_THRESHOLD_M: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ground truth has no valid step")]
    EmptyFuture,
    #[error("probabilities must be non-negative and sum to 1 (sum {sum})")]
    Probability { sum: f64 },
}

/// Which per-mode error picks the mode whose probability the brier term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BestModeCriterion {
    #[default]
    Fde,
    Ade,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub miss_threshold: f64,
    pub brier_best_mode: BestModeCriterion,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            miss_threshold: MISS_THRESHOLD_M,
            brier_best_mode: BestModeCriterion::Fde,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub sample_key: String,
    pub min_ade: f64,
    pub min_fde: f64,
    pub miss: bool,
    pub brier_min_fde: f64,
    pub best_mode_ade: usize,
    pub best_mode_fde: usize,
    pub p_best: f64,
}

fn check_shapes<T: AsRef<[[f64; 2]]>>(
    pred: &[T],
    gt: &[[f64; 2]],
    mask: &[bool],
) -> Result<usize, MetricsError> {
    if pred.is_empty() {
        return Err(MetricsError::ShapeMismatch("no predicted modes".into()));
    }
    if mask.len() != gt.len() {
        return Err(MetricsError::ShapeMismatch(format!(
            "mask has {} steps, ground truth {}",
            mask.len(),
            gt.len()
        )));
    }
    if let Some((k, m)) = pred.iter().enumerate().find(|(_, m)| m.as_ref().len() != gt.len()) {
        return Err(MetricsError::ShapeMismatch(format!(
            "mode {k} has {} steps, ground truth {}",
            m.as_ref().len(),
            gt.len()
        )));
    }
    mask.iter().rposition(|&m| m).ok_or(MetricsError::EmptyFuture)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Index and value of the smallest entry; ties resolve to the lowest index.
fn argmin(values: impl IntoIterator<Item = f64>) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, v) in values.into_iter().enumerate() {
        if v < best.0 || i == 0 {
            best = (v, i);
        }
    }
    best
}

/// Minimum over modes of the mean error over valid steps. Returns `(value, mode)`.
pub fn min_ade<T: AsRef<[[f64; 2]]>>(
    pred: &[T],
    gt: &[[f64; 2]],
    mask: &[bool],
) -> Result<(f64, usize), MetricsError> {
    check_shapes(pred, gt, mask)?;
    let n_valid = mask.iter().filter(|&&m| m).count() as f64;
    Ok(argmin(pred.iter().map(|mode| {
        let sum: f64 = mode
            .as_ref()
            .iter()
            .zip(gt)
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|((&p, &g), _)| dist(p, g))
            .sum();
        sum / n_valid
    })))
}

/// Minimum over modes of the error at the last valid step. Returns `(value, mode)`.
pub fn min_fde<T: AsRef<[[f64; 2]]>>(
    pred: &[T],
    gt: &[[f64; 2]],
    mask: &[bool],
) -> Result<(f64, usize), MetricsError> {
    let last = check_shapes(pred, gt, mask)?;
    Ok(argmin(pred.iter().map(|mode| dist(mode.as_ref()[last], gt[last]))))
}

/// True when `min_fde` strictly exceeds the 2 m threshold.
pub fn miss(min_fde: f64) -> bool {
    miss_at(min_fde, MISS_THRESHOLD_M)
}

pub fn miss_at(min_fde: f64, threshold: f64) -> bool {
    min_fde > threshold
}

fn check_probs(probs: &[f64], k: usize) -> Result<(), MetricsError> {
    if probs.len() != k {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} probabilities for {k} modes",
            probs.len()
        )));
    }
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || !((sum - 1.0).abs() <= PROB_SUM_TOL) {
        return Err(MetricsError::Probability { sum });
    }
    Ok(())
}

/// minFDE plus `(1 - p)^2`, where `p` is the probability of the FDE-best mode.
/// Returns `(value, p)`.
pub fn brier_min_fde<T: AsRef<[[f64; 2]]>>(
    pred: &[T],
    probs: &[f64],
    gt: &[[f64; 2]],
    mask: &[bool],
) -> Result<(f64, f64), MetricsError> {
    let (fde, best) = min_fde(pred, gt, mask)?;
    check_probs(probs, pred.len())?;
    let p = probs[best];
    Ok((fde + (1.0 - p) * (1.0 - p), p))
}

/// All four metrics for one sample in a single pass over the modes.
pub fn score_sample<T: AsRef<[[f64; 2]]>>(
    sample_key: &str,
    pred: &[T],
    probs: &[f64],
    gt: &[[f64; 2]],
    mask: &[bool],
    cfg: &MetricsConfig,
) -> Result<SampleMetrics, MetricsError> {
    let last = check_shapes(pred, gt, mask)?;
    check_probs(probs, pred.len())?;
    let n_valid = mask.iter().filter(|&&m| m).count() as f64;

    let mut ades = Vec::with_capacity(pred.len());
    let mut fdes = Vec::with_capacity(pred.len());
    for mode in pred {
        let mode = mode.as_ref();
        let mut sum = 0.0;
        for t in 0..gt.len() {
            if mask[t] {
                sum += dist(mode[t], gt[t]);
            }
        }
        ades.push(sum / n_valid);
        fdes.push(dist(mode[last], gt[last]));
    }
    let (min_ade, best_mode_ade) = argmin(ades.iter().copied());
    let (min_fde, best_mode_fde) = argmin(fdes.iter().copied());
    let brier_mode = match cfg.brier_best_mode {
        BestModeCriterion::Fde => best_mode_fde,
        BestModeCriterion::Ade => best_mode_ade,
    };
    let p_best = probs[brier_mode];
    Ok(SampleMetrics {
        sample_key: sample_key.to_string(),
        min_ade,
        min_fde,
        miss: miss_at(min_fde, cfg.miss_threshold),
        brier_min_fde: min_fde + (1.0 - p_best) * (1.0 - p_best),
        best_mode_ade,
        best_mode_fde,
        p_best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(n: usize, dx: f64, dy: f64) -> Vec<[f64; 2]> {
        (0..n).map(|i| [i as f64 + dx, dy]).collect()
    }

    #[test]
    fn identity_prediction() {
        let gt = straight(10, 0.0, 0.0);
        assert_eq!(min_ade(std::slice::from_ref(&gt), &gt, &[true; 10]).unwrap(), (0.0, 0));
        assert_eq!(min_fde(std::slice::from_ref(&gt), &gt, &[true; 10]).unwrap(), (0.0, 0));
    }

    #[test]
    fn constant_offsets() {
        let gt = straight(10, 0.0, 0.0);
        let pred = [straight(10, 1.0, 0.0), straight(10, 0.0, 2.0)];
        let (v, i) = min_ade(&pred, &gt, &[true; 10]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(i, 0);
    }

    #[test]
    fn single_valid_step() {
        let gt = straight(5, 0.0, 0.0);
        let mut pred = gt.clone();
        pred[4] = [4.0, 3.0];
        pred[0] = [100.0, 100.0];
        let mut mask = [false; 5];
        mask[4] = true;
        assert_eq!(min_ade(&[pred], &gt, &mask).unwrap().0, 3.0);
    }

    #[test]
    fn fde_examples() {
        let mut gt = vec![[0.0, 0.0]; 3];
        gt[2] = [5.0, 0.0];
        let mut a = vec![[0.0, 0.0]; 3];
        let mut b = a.clone();
        a[2] = [5.0, 1.0];
        b[2] = [3.0, 0.0];
        assert_eq!(min_fde(&[a.clone(), b.clone()], &gt, &[true; 3]).unwrap(), (1.0, 0));
        assert_eq!(min_fde(&[b.clone(), gt.clone()], &gt, &[true; 3]).unwrap(), (0.0, 1));
        let mut c = a.clone();
        c[2] = [5.0, -1.0];
        assert_eq!(min_fde(&[c, a], &gt, &[true; 3]).unwrap(), (1.0, 0));
    }

    #[test]
    fn miss_boundary() {
        assert!(!miss(2.0));
        assert!(miss(2.0 + 1e-6));
        assert!(!miss(0.0));
    }

    #[test]
    fn brier_examples() {
        let gt = vec![[0.0, 0.0], [10.0, 0.0]];
        let at = |d: f64| vec![[0.0, 0.0], [10.0, d]];
        let (v, p) = brier_min_fde(&[at(0.5)], &[1.0], &gt, &[true; 2]).unwrap();
        assert_eq!((v, p), (0.5, 1.0));
        let (v, _) = brier_min_fde(&[at(2.0), at(5.0)], &[0.5, 0.5], &gt, &[true; 2]).unwrap();
        assert!((v - 2.25).abs() < 1e-12);
        let modes: Vec<_> = (0..6).map(|k| at(1.0 + k as f64)).collect();
        let (v, _) = brier_min_fde(&modes, &[1.0 / 6.0; 6], &gt, &[true; 2]).unwrap();
        assert!((v - (1.0 + 25.0 / 36.0)).abs() < 1e-12);
        assert!(matches!(
            brier_min_fde(&[at(1.0)], &[0.9], &gt, &[true; 2]),
            Err(MetricsError::Probability { .. })
        ));
    }

    #[test]
    fn errors() {
        let gt = straight(4, 0.0, 0.0);
        assert_eq!(min_ade(std::slice::from_ref(&gt), &gt, &[false; 4]), Err(MetricsError::EmptyFuture));
        assert!(matches!(
            min_fde(&[straight(3, 0.0, 0.0)], &gt, &[true; 4]),
            Err(MetricsError::ShapeMismatch(_))
        ));
        let none: [Vec<[f64; 2]>; 0] = [];
        assert!(matches!(min_ade(&none, &gt, &[true; 4]), Err(MetricsError::ShapeMismatch(_))));
    }

    #[test]
    fn score_sample_matches_components() {
        let gt = straight(8, 0.0, 0.0);
        let pred = [straight(8, 0.5, 0.0), straight(8, 0.0, -0.2), straight(8, 3.0, 1.0)];
        let probs = [0.2, 0.3, 0.5];
        let s = score_sample("k", &pred, &probs, &gt, &[true; 8], &MetricsConfig::default()).unwrap();
        assert_eq!((s.min_ade, s.best_mode_ade), min_ade(&pred, &gt, &[true; 8]).unwrap());
        assert_eq!((s.min_fde, s.best_mode_fde), min_fde(&pred, &gt, &[true; 8]).unwrap());
        assert_eq!((s.brier_min_fde, s.p_best), brier_min_fde(&pred, &probs, &gt, &[true; 8]).unwrap());
        assert!(!s.miss);
    }
}
