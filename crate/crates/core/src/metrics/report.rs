//! Cache-wide evaluation and stratified summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::{score_sample, MetricsConfig, MetricsError, SampleMetrics};
use crate::io::{CacheError, CacheReader, PredictionError, PredictionLimits, PredictionRecord};
use crate::preprocess::PreprocConfig;
use crate::stratify::{
    label_sample, DifficultyBins, KalmanParams, StratifyError, TrajectoryType,
};

/// Number of modes the benchmark protocol scores; fewer triggers a warning.
pub const EXPECTED_MODES: usize = 6;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("{} cache samples have no prediction: {}", .0.len(), preview(.0))]
    MissingPrediction(Vec<String>),
    #[error("invalid prediction: {0}")]
    Prediction(#[from] PredictionError),
    #[error("{key}: {source}")]
    Metrics { key: String, source: MetricsError },
    #[error("{key}: {source}")]
    Stratify { key: String, source: StratifyError },
    #[error("invalid evaluation settings: {0}")]
    Settings(String),
}

fn preview(keys: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut s = keys.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if keys.len() > SHOWN {
        let _ = write!(s, ", … ({} more)", keys.len() - SHOWN);
    }
    s
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub metrics: MetricsConfig,
    pub by_type: bool,
    pub by_difficulty: bool,
    pub bins: DifficultyBins,
    pub kalman: KalmanParams,
    /// Score only the predicted samples instead of failing on gaps.
    pub allow_missing: bool,
    pub max_modes: usize,
    /// When set, the cache must have been built with exactly this config.
    pub expected_config: Option<PreprocConfig>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            metrics: MetricsConfig::default(),
            by_type: true,
            by_difficulty: true,
            bins: DifficultyBins::decade(),
            kalman: KalmanParams::default(),
            allow_missing: false,
            max_modes: EXPECTED_MODES,
            expected_config: None,
        }
    }
}

/// Means over a set of samples; all `None` when the set is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub count: u64,
    pub min_ade: Option<f64>,
    pub min_fde: Option<f64>,
    pub miss_rate: Option<f64>,
    pub brier_min_fde: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumSummary {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(flatten)]
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    #[serde(flatten)]
    pub metrics: SampleMetrics,
    pub num_modes: usize,
    pub traj_type: TrajectoryType,
    pub kalman_difficulty: Option<f64>,
    pub difficulty_bin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub cache_samples: usize,
    pub scored: usize,
    pub missing: Vec<String>,
    /// Prediction keys that match no cache sample; ignored.
    pub unmatched_predictions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub preprocess: PreprocConfig,
    pub config_fingerprint: String,
    pub metrics: MetricsConfig,
    pub kalman: KalmanParams,
    pub difficulty_bins: String,
    pub bin_edges: Vec<f64>,
    pub strata: Vec<&'static str>,
    pub max_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub config: ReportConfig,
    pub coverage: Coverage,
    pub overall: MetricSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub by_trajectory_type: Option<Vec<StratumSummary>>,
    /// One row per configured bin, plus `unscored` when some samples had
    /// too little history for the filter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub by_kalman_difficulty: Option<Vec<StratumSummary>>,
    pub warnings: Vec<String>,
    pub samples: Vec<SampleRow>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    count: u64,
    ade: f64,
    fde: f64,
    misses: u64,
    brier: f64,
}

impl Sums {
    fn add(&mut self, m: &SampleMetrics) {
        self.count += 1;
        self.ade += m.min_ade;
        self.fde += m.min_fde;
        self.misses += m.miss as u64;
        self.brier += m.brier_min_fde;
    }

    fn summary(&self) -> MetricSummary {
        let n = self.count as f64;
        let mean = |s: f64| (self.count > 0).then(|| s / n);
        MetricSummary {
            count: self.count,
            min_ade: mean(self.ade),
            min_fde: mean(self.fde),
            miss_rate: mean(self.misses as f64),
            brier_min_fde: mean(self.brier),
        }
    }
}

/// Scores every cache sample against `predictions` and aggregates overall
/// and per-stratum means. Rows are reduced in sorted key order, so the
/// report is independent of thread count.
pub fn evaluate(
    cache: &CacheReader,
    predictions: &BTreeMap<String, PredictionRecord>,
    cfg: &EvalConfig,
) -> Result<MetricsReport, EvalError> {
    if let Some(expected) = &cfg.expected_config {
        cache.check_config(expected)?;
    }
    if cfg.by_difficulty {
        cfg.kalman
            .validate()
            .map_err(|e| EvalError::Settings(e.to_string()))?;
    }
    let limits = PredictionLimits {
        max_modes: cfg.max_modes,
        horizon: Some(cache.config().future_len()),
    };

    let mut missing = Vec::new();
    let mut targets = Vec::with_capacity(cache.len());
    for (i, key) in cache.keys().enumerate() {
        match predictions.get(key) {
            Some(rec) => targets.push((i, rec)),
            None => missing.push(key.to_string()),
        }
    }
    missing.sort();
    if !missing.is_empty() && !cfg.allow_missing {
        return Err(EvalError::MissingPrediction(missing));
    }
    let unmatched = predictions
        .keys()
        .filter(|k| cache.index_of(k).is_none())
        .count();

    let mut rows = crate::map_indices(targets.len(), |j| {
        let (i, rec) = targets[j];
        rec.validate(&limits)?;
        let sample = cache.get(i)?;
        let key = &sample.sample_key;
        let metrics = score_sample(
            key,
            &rec.trajectories,
            &rec.probabilities,
            &sample.gt_future,
            &sample.gt_mask,
            &cfg.metrics,
        )
        .map_err(|source| EvalError::Metrics { key: key.clone(), source })?;
        let label = label_sample(&sample, &cfg.kalman, &cfg.bins)
            .map_err(|source| EvalError::Stratify { key: key.clone(), source })?;
        Ok::<_, EvalError>(SampleRow {
            metrics,
            num_modes: rec.num_modes(),
            traj_type: label.traj_type,
            kalman_difficulty: label.kalman_difficulty,
            difficulty_bin: label.difficulty_bin.map(|b| cfg.bins.labels[b].clone()),
        })
    })?;
    rows.sort_by(|a, b| a.metrics.sample_key.cmp(&b.metrics.sample_key));

    let mut overall = Sums::default();
    let mut types = [Sums::default(); 8];
    let mut bins = vec![Sums::default(); cfg.bins.len()];
    let mut unscored = Sums::default();
    let mut few_modes = 0usize;
    for row in &rows {
        overall.add(&row.metrics);
        types[row.traj_type.index()].add(&row.metrics);
        match row.kalman_difficulty {
            Some(d) => bins[cfg.bins.bin_index(d)].add(&row.metrics),
            None => unscored.add(&row.metrics),
        }
        few_modes += (row.num_modes < EXPECTED_MODES) as usize;
    }

    let mut warnings = Vec::new();
    if few_modes > 0 {
        warnings.push(format!(
            "{few_modes} samples have fewer than {EXPECTED_MODES} predicted modes"
        ));
    }
    if !missing.is_empty() {
        warnings.push(format!(
            "{} of {} cache samples have no prediction and were skipped",
            missing.len(),
            cache.len()
        ));
    }
    if unmatched > 0 {
        warnings.push(format!("{unmatched} predictions match no cache sample"));
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let by_trajectory_type = cfg.by_type.then(|| {
        TrajectoryType::ALL
            .iter()
            .map(|t| StratumSummary {
                label: t.as_str().to_string(),
                lower: None,
                upper: None,
                summary: types[t.index()].summary(),
            })
            .collect()
    });
    let by_kalman_difficulty = cfg.by_difficulty.then(|| {
        let mut v: Vec<StratumSummary> = bins
            .iter()
            .enumerate()
            .map(|(i, s)| StratumSummary {
                label: cfg.bins.labels[i].clone(),
                lower: Some(cfg.bins.edges[i]),
                upper: cfg.bins.edges.get(i + 1).copied(),
                summary: s.summary(),
            })
            .collect();
        if unscored.count > 0 {
            v.push(StratumSummary {
                label: "unscored".into(),
                lower: None,
                upper: None,
                summary: unscored.summary(),
            });
        }
        v
    });

    let mut strata = Vec::new();
    if cfg.by_type {
        strata.push("type");
    }
    if cfg.by_difficulty {
        strata.push("kalman");
    }
    Ok(MetricsReport {
        config: ReportConfig {
            preprocess: cache.config().clone(),
            config_fingerprint: cache.manifest().config_fingerprint.clone(),
            metrics: cfg.metrics,
            kalman: cfg.kalman.clone(),
            difficulty_bins: cfg.bins.name.clone(),
            bin_edges: cfg.bins.edges.clone(),
            strata,
            max_modes: cfg.max_modes,
        },
        coverage: Coverage {
            cache_samples: cache.len(),
            scored: rows.len(),
            missing,
            unmatched_predictions: unmatched,
        },
        overall: overall.summary(),
        by_trajectory_type,
        by_kalman_difficulty,
        warnings,
        samples: rows,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

fn table(out: &mut String, title: &str, rows: &[(String, &MetricSummary)]) {
    let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0).max(7);
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "  {:<width$}  {:>7}  {:>9}  {:>9}  {:>9}  {:>12}",
        "stratum", "count", "minADE", "minFDE", "MR", "brier-minFDE"
    );
    for (label, s) in rows {
        let pad = width - label.chars().count();
        let _ = writeln!(
            out,
            "  {label}{:pad$}  {:>7}  {:>9}  {:>9}  {:>9}  {:>12}",
            "",
            s.count,
            cell(s.min_ade),
            cell(s.min_fde),
            cell(s.miss_rate),
            cell(s.brier_min_fde),
        );
    }
}

/// Aligned text rendering: overall row, then one block per stratification.
pub fn render_table(report: &MetricsReport) -> String {
    let mut out = String::new();
    let c = &report.coverage;
    let _ = writeln!(
        out,
        "samples scored: {} of {} (bins: {})",
        c.scored, c.cache_samples, report.config.difficulty_bins
    );
    table(&mut out, "overall", &[("all".to_string(), &report.overall)]);
    let rows = |v: &[StratumSummary]| -> Vec<(String, MetricSummary)> {
        v.iter().map(|s| (s.label.clone(), s.summary.clone())).collect()
    };
    for (title, strata) in [
        ("by trajectory type", &report.by_trajectory_type),
        ("by Kalman difficulty", &report.by_kalman_difficulty),
    ] {
        if let Some(v) = strata {
            let owned = rows(v);
            let refs: Vec<_> = owned.iter().map(|(l, s)| (l.clone(), s)).collect();
            out.push('\n');
            table(&mut out, title, &refs);
        }
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
