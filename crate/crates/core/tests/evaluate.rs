mod common;

use std::collections::BTreeMap;

use trajhub::baselines::{predict_cache, Baseline};
use trajhub::io::{write_cache, CacheReader, PredictionRecord};
use trajhub::metrics::{evaluate, render_table, EvalConfig, EvalError, MetricsReport};
use trajhub::stratify::{DifficultyBins, KalmanParams, TrajectoryType};
use trajhub::{PreprocConfig, UnifiedSample};

fn cache_of(samples: &[UnifiedSample]) -> (tempfile::TempDir, CacheReader) {
    let dir = tempfile::tempdir().unwrap();
    write_cache(samples, dir.path(), &PreprocConfig::default()).unwrap();
    let r = CacheReader::open(dir.path()).unwrap();
    (dir, r)
}

/// Ground truth shifted sideways by `offset` at every step, single mode.
fn shifted(s: &UnifiedSample, offset: f64) -> PredictionRecord {
    PredictionRecord {
        sample_key: s.sample_key.clone(),
        trajectories: vec![s.gt_future.iter().map(|p| [p[0], p[1] + offset]).collect()],
        probabilities: vec![1.0],
    }
}

fn by_key(records: Vec<PredictionRecord>) -> BTreeMap<String, PredictionRecord> {
    records.into_iter().map(|r| (r.sample_key.clone(), r)).collect()
}

#[test]
fn oracle_predictions_score_zero() {
    let samples = common::samples(2, 10);
    let (_d, cache) = cache_of(&samples);
    let preds = by_key(samples.iter().map(|s| shifted(s, 0.0)).collect());
    let rep = evaluate(&cache, &preds, &EvalConfig::default()).unwrap();
    assert_eq!(rep.overall.min_ade, Some(0.0));
    assert_eq!(rep.overall.min_fde, Some(0.0));
    assert_eq!(rep.overall.miss_rate, Some(0.0));
    assert_eq!(rep.overall.brier_min_fde, Some(0.0));
}

#[test]
fn two_sample_hand_aggregation() {
    let samples: Vec<_> = common::samples(1, 11).into_iter().take(2).collect();
    let (_d, cache) = cache_of(&samples);
    let preds = by_key(vec![shifted(&samples[0], 1.0), shifted(&samples[1], 3.0)]);
    let rep = evaluate(&cache, &preds, &EvalConfig::default()).unwrap();
    assert!((rep.overall.min_fde.unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(rep.overall.miss_rate, Some(0.5));
    assert_eq!(rep.overall.count, 2);
}

#[test]
fn strata_rows_always_present() {
    let samples = common::samples(1, 12);
    let (_d, cache) = cache_of(&samples);
    let preds = by_key(samples.iter().map(|s| shifted(s, 0.5)).collect());
    for bins in [DifficultyBins::decade(), DifficultyBins::paper_main(), DifficultyBins::paper_appendix()] {
        let cfg = EvalConfig { bins: bins.clone(), ..EvalConfig::default() };
        let rep = evaluate(&cache, &preds, &cfg).unwrap();
        let types = rep.by_trajectory_type.as_ref().unwrap();
        assert_eq!(types.len(), 8);
        for (row, t) in types.iter().zip(TrajectoryType::ALL) {
            assert_eq!(row.label, t.as_str());
            if row.summary.count == 0 {
                assert_eq!(row.summary.min_fde, None);
            }
        }
        let diff = rep.by_kalman_difficulty.as_ref().unwrap();
        assert!(diff.len() >= bins.len());
        for (row, label) in diff.iter().zip(&bins.labels) {
            assert_eq!(&row.label, label);
        }
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        let empty = json["by_trajectory_type"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["count"] == 0)
            .expect("synthetic data has no lane changes");
        assert!(empty["min_fde"].is_null());
    }
}

fn recombines(rep: &MetricsReport) {
    let overall = &rep.overall;
    for strata in [rep.by_trajectory_type.as_ref(), rep.by_kalman_difficulty.as_ref()] {
        let strata = strata.unwrap();
        let count: u64 = strata.iter().map(|s| s.summary.count).sum();
        assert_eq!(count, overall.count);
        let metric = |f: fn(&trajhub::metrics::MetricSummary) -> Option<f64>| {
            let weighted: f64 = strata
                .iter()
                .filter_map(|s| f(&s.summary).map(|m| m * s.summary.count as f64))
                .sum();
            let total = f(overall).unwrap() * overall.count as f64;
            assert!((weighted - total).abs() <= 1e-9 * total.abs().max(1.0), "{weighted} vs {total}");
        };
        metric(|s| s.min_ade);
        metric(|s| s.min_fde);
        metric(|s| s.miss_rate);
        metric(|s| s.brier_min_fde);
    }
}

#[test]
fn stratified_means_recombine() {
    let samples = common::samples(6, 13);
    let (_d, cache) = cache_of(&samples);
    for model in [Baseline::ConstantVelocity, Baseline::Kalman] {
        let (preds, _) = predict_cache(&cache, model, 6, &KalmanParams::default()).unwrap();
        let rep = evaluate(&cache, &by_key(preds), &EvalConfig::default()).unwrap();
        recombines(&rep);
        assert!(rep.warnings.is_empty(), "{:?}", rep.warnings);
        let table = render_table(&rep);
        assert!(table.contains("left_turn") && table.contains("0–10"));
    }
}

#[test]
fn missing_predictions() {
    let samples = common::samples(1, 14);
    let (_d, cache) = cache_of(&samples);
    let preds = by_key(samples.iter().skip(1).map(|s| shifted(s, 0.0)).collect());
    match evaluate(&cache, &preds, &EvalConfig::default()) {
        Err(EvalError::MissingPrediction(keys)) => assert_eq!(keys, vec![samples[0].sample_key.clone()]),
        other => panic!("expected missing prediction, got {other:?}"),
    }
    let cfg = EvalConfig { allow_missing: true, ..EvalConfig::default() };
    let rep = evaluate(&cache, &preds, &cfg).unwrap();
    assert_eq!(rep.coverage.scored, samples.len() - 1);
    assert_eq!(rep.coverage.missing, vec![samples[0].sample_key.clone()]);
}

#[test]
fn too_many_modes_is_an_error() {
    let samples: Vec<_> = common::samples(1, 15).into_iter().take(1).collect();
    let (_d, cache) = cache_of(&samples);
    let mut rec = shifted(&samples[0], 0.0);
    rec.trajectories = vec![rec.trajectories[0].clone(); 7];
    rec.probabilities = vec![1.0 / 7.0; 7];
    let err = evaluate(&cache, &by_key(vec![rec]), &EvalConfig::default()).unwrap_err();
    assert!(matches!(err, EvalError::Prediction(_)), "{err}");
}

#[test]
fn expected_config_is_checked() {
    let samples: Vec<_> = common::samples(1, 16).into_iter().take(1).collect();
    let (_d, cache) = cache_of(&samples);
    let cfg = EvalConfig {
        expected_config: Some(PreprocConfig { future_sec: 5.0, ..PreprocConfig::default() }),
        ..EvalConfig::default()
    };
    let err = evaluate(&cache, &by_key(vec![shifted(&samples[0], 0.0)]), &cfg).unwrap_err();
    assert!(err.to_string().contains("future_sec"), "{err}");
}
