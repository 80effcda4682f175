use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use trajhub::baselines::{predict_cache, Baseline};
use trajhub::io::{
    list_scenario_files, parse_predictions, parse_scenario_lines, write_predictions, write_scenario,
    CacheError, CacheReader, PredictionLimits,
};
use trajhub::metrics::{evaluate as run_evaluate, render_table, BestModeCriterion, EvalConfig, EvalError, MetricsConfig};
use trajhub::pipeline::{preprocess_into_cache, PipelineError, PipelineOptions};
use trajhub::preprocess::MaskedAttribute;
use trajhub::stratify::{profile_dataset, DifficultyBins, KalmanParams, StratifyError};
use trajhub::syngen::{generate_scenario, GenConfig, RNG_ALGORITHM};
use trajhub::PreprocConfig;

use crate::{AnalyzeArgs, EvaluateArgs, GenerateArgs, PredictArgs, PreprocessArgs};

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_COVERAGE: u8 = 3;

/// Scenarios generated and written per round.
const GENERATE_BATCH: usize = 256;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn io_err(context: impl Display, e: impl Display) -> CliError {
    CliError {
        code: EXIT_IO,
        message: format!("{context}: {e}"),
    }
}

fn config_err(e: impl Display) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: e.to_string(),
    }
}

type CmdResult = Result<(), CliError>;

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| io_err(path.display(), e))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CmdResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent.display(), e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path.display(), e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| io_err("thread pool", e))?;
    Ok(pool.install(f))
}

fn cache_err(path: &Path, e: CacheError) -> CliError {
    match e {
        CacheError::ConfigMismatch { .. } | CacheError::DuplicateKey(_) => config_err(e),
        other => io_err(path.display(), other),
    }
}

fn open_cache(path: &Path) -> Result<CacheReader, CliError> {
    CacheReader::open(path).map_err(|e| cache_err(path, e))
}

fn parse_bins(s: &str) -> Result<DifficultyBins, CliError> {
    s.parse().map_err(|e: StratifyError| config_err(e))
}

pub fn generate(a: GenerateArgs) -> CmdResult {
    let mut cfg: GenConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => GenConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(n) = a.n_scenarios {
        cfg.n_scenarios = n;
    }
    cfg.validate().map_err(config_err)?;
    fs::create_dir_all(&a.out).map_err(|e| io_err(a.out.display(), e))?;

    let mut files = Vec::with_capacity(cfg.n_scenarios);
    for start in (0..cfg.n_scenarios).step_by(GENERATE_BATCH) {
        let end = (start + GENERATE_BATCH).min(cfg.n_scenarios);
        let batch: Vec<_> = with_pool(a.threads, || {
            use rayon::prelude::*;
            (start..end)
                .into_par_iter()
                .map(|i| generate_scenario(cfg.seed, i as u64, &cfg))
                .collect::<Result<Vec<_>, _>>()
        })?
        .map_err(config_err)?;
        for s in batch {
            let name = format!("{}.jsonl", s.id);
            let mut bytes = write_scenario(&s);
            bytes.push(b'\n');
            write(&a.out.join(&name), bytes)?;
            files.push(name);
        }
        log::info!("generated {end}/{} scenarios", cfg.n_scenarios);
    }
    let manifest = json!({
        "generator": "trajhub-syngen",
        "version": env!("CARGO_PKG_VERSION"),
        "rng": RNG_ALGORITHM,
        "config": cfg,
        "scenario_count": files.len(),
        "files": files,
    });
    write(&a.out.join("generation.json"), pretty(&manifest))?;
    eprintln!("wrote {} scenarios to {}", files.len(), a.out.display());
    Ok(())
}

fn preproc_config(a: &PreprocessArgs) -> Result<PreprocConfig, CliError> {
    let mut cfg: PreprocConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => PreprocConfig::default(),
    };
    if let Some(v) = a.past {
        cfg.past_sec = v;
    }
    if let Some(v) = a.future {
        cfg.future_sec = v;
    }
    if let Some(v) = a.map_range {
        cfg.map_range_m = v;
    }
    if let Some(v) = a.map_res {
        cfg.map_resolution_m = v;
    }
    if let Some(v) = a.points_per_chunk {
        cfg.points_per_chunk = v;
    }
    if let Some(v) = a.max_neighbors {
        cfg.max_neighbors = v;
    }
    for m in a.mask.iter().filter(|m| !m.is_empty()) {
        let attr: MaskedAttribute = serde_json::from_value(json!(m))
            .map_err(|_| config_err(format!("unknown masked attribute {m:?}")))?;
        cfg.masked_attributes.push(attr);
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

pub fn preprocess(a: PreprocessArgs) -> CmdResult {
    let cfg = preproc_config(&a)?;
    let files = list_scenario_files(&a.input).map_err(|e| io_err(a.input.display(), e))?;
    if files.is_empty() {
        log::warn!("no .jsonl files in {}", a.input.display());
    }
    let name = |p: &PathBuf| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let load = |p: &PathBuf| match fs::read(p) {
        Ok(bytes) => parse_scenario_lines(&bytes)
            .into_iter()
            .map(|r| r.map_err(|e| e.to_string()))
            .collect(),
        Err(e) => vec![Err(format!("read failed: {e}"))],
    };
    let opts = PipelineOptions {
        threads: a.threads,
        skip_bad: a.skip_bad,
    };
    let summary = preprocess_into_cache(&files, name, load, &cfg, &a.out, opts).map_err(|e| match e {
        PipelineError::Config(e) => config_err(e),
        PipelineError::Cache(e) => cache_err(&a.out, e),
        PipelineError::ThreadPool(m) => io_err("thread pool", m),
        PipelineError::Failed(f) => {
            for x in &f {
                eprintln!("failed: {x}");
            }
            config_err(format!(
                "{} inputs failed; rerun with --skip-bad to skip them",
                f.len()
            ))
        }
    })?;
    eprintln!(
        "{} scenarios → {} samples in {:.2} s ({:.0} samples/s, {} threads), {} failures",
        summary.scenarios,
        summary.samples,
        summary.elapsed_s,
        summary.samples_per_s(),
        summary.threads,
        summary.failures.len()
    );
    Ok(())
}

pub fn predict(a: PredictArgs) -> CmdResult {
    let model: Baseline = a.model.parse().map_err(config_err)?;
    if a.modes == 0 {
        return Err(config_err("--modes must be at least 1"));
    }
    let cache = open_cache(&a.cache)?;
    let params = KalmanParams::default();
    let (records, fallbacks) =
        with_pool(a.threads, || predict_cache(&cache, model, a.modes, &params))?
            .map_err(|e| cache_err(&a.cache, e))?;
    if fallbacks > 0 {
        log::warn!("{fallbacks} samples had too little history for the filter; used constant velocity");
    }
    write(&a.out, write_predictions(&records))?;
    eprintln!("wrote {} predictions to {}", records.len(), a.out.display());
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> CmdResult {
    let mut by_type = false;
    let mut by_difficulty = false;
    for s in a.strata.iter().filter(|s| !s.is_empty()) {
        match s.as_str() {
            "type" => by_type = true,
            "kalman" => by_difficulty = true,
            other => return Err(config_err(format!("unknown stratification {other:?}"))),
        }
    }
    let brier_best_mode = match a.best_mode.as_str() {
        "fde" => BestModeCriterion::Fde,
        "ade" => BestModeCriterion::Ade,
        other => return Err(config_err(format!("unknown best-mode criterion {other:?}"))),
    };
    if !(a.miss_threshold.is_finite() && a.miss_threshold >= 0.0) {
        return Err(config_err("--miss-threshold must be non-negative"));
    }
    let expected_config = match &a.expect_config {
        Some(p) => Some(read_json::<PreprocConfig>(p)?),
        None => None,
    };
    let cfg = EvalConfig {
        metrics: MetricsConfig {
            miss_threshold: a.miss_threshold,
            brier_best_mode,
        },
        by_type,
        by_difficulty,
        bins: parse_bins(&a.kalman_bins)?,
        kalman: KalmanParams::default(),
        allow_missing: a.allow_missing,
        max_modes: a.max_modes,
        expected_config,
    };

    let cache = open_cache(&a.cache)?;
    let limits = PredictionLimits {
        max_modes: a.max_modes,
        horizon: Some(cache.config().future_len()),
    };
    let predictions = parse_predictions(&read(&a.predictions)?, &limits)
        .map_err(|e| config_err(format!("{}: {e}", a.predictions.display())))?;
    let report = with_pool(a.threads, || run_evaluate(&cache, &predictions, &cfg))?.map_err(|e| match e {
        EvalError::Cache(c) => cache_err(&a.cache, c),
        EvalError::MissingPrediction(_) => CliError {
            code: EXIT_COVERAGE,
            message: e.to_string(),
        },
        other => config_err(other),
    })?;
    let table = render_table(&report);
    write(&a.out, format!("{}\n", report.to_json()))?;
    write(&a.out.with_extension("txt"), &table)?;
    print!("{table}");
    Ok(())
}

pub fn analyze(a: AnalyzeArgs) -> CmdResult {
    let bins = parse_bins(&a.kalman_bins)?;
    let cache = open_cache(&a.cache)?;
    if cache.is_empty() {
        return Err(io_err(a.cache.display(), "cache is empty"));
    }
    let params = KalmanParams::default();
    let profile = with_pool(a.threads, || profile_dataset(&cache, &params, &bins))?.map_err(|e| match e {
        StratifyError::Cache(c) => cache_err(&a.cache, c),
        StratifyError::EmptyCache => io_err(a.cache.display(), e),
        other => config_err(other),
    })?;
    write(&a.out, pretty(&profile))?;
    println!("samples: {}", profile.sample_count);
    for t in &profile.trajectory_types {
        println!("  {:<14} {:>7} {:>7.2}%", t.label, t.count, t.percent);
    }
    println!("Kalman difficulty ({}), unscored {}", profile.difficulty_bins, profile.unscored);
    for b in &profile.difficulty_histogram {
        println!("  {:<14} {:>7} {:>7.2}%", b.label, b.count, b.percent);
    }
    Ok(())
}
