//! Parallel conversion of scenarios into a sample cache.
//!
//! Inputs are processed in fixed-size batches. Within a batch, loading,
//! feature building and encoding run on the worker pool; payloads are then
//! appended in input order, so the cache bytes do not depend on the number
//! of threads.

use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use crate::io::codec::encode_sample;
use crate::io::{CacheError, CacheManifest, CacheWriter};
use crate::preprocess::{build_sample, ConfigError};
use crate::scenario::Scenario;
use crate::PreprocConfig;

/// Inputs handed to the pool at once.
pub const BATCH_SIZE: usize = 256;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("{} inputs failed, first: {}", .0.len(), .0[0])]
    Failed(Vec<Failure>),
}

/// An input or sample that could not be converted.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    /// Input name, or sample key for per-agent failures.
    pub item: String,
    pub message: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.item, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessSummary {
    pub manifest: CacheManifest,
    pub inputs: usize,
    /// Scenarios read successfully.
    pub scenarios: usize,
    pub samples: usize,
    pub failures: Vec<Failure>,
    pub threads: usize,
    pub elapsed_s: f64,
}

impl PreprocessSummary {
    pub fn samples_per_s(&self) -> f64 {
        if self.elapsed_s > 0.0 {
            self.samples as f64 / self.elapsed_s
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineOptions {
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    /// Log and skip failing inputs instead of aborting.
    pub skip_bad: bool,
}

type Encoded = Vec<(String, Vec<u8>)>;

/// One sample per focal agent at the scenario's reference step, focal
/// agents in id order.
fn encode_scenario(s: &Scenario, cfg: &PreprocConfig) -> (Encoded, Vec<Failure>) {
    let mut focal: Vec<&String> = s.focal_agents.iter().collect();
    focal.sort();
    focal.dedup();
    let mut ok = Vec::with_capacity(focal.len());
    let mut failed = Vec::new();
    for id in focal {
        match build_sample(s, id, s.current_index, cfg) {
            Ok(sample) => {
                let payload = encode_sample(&sample);
                ok.push((sample.sample_key, payload));
            }
            Err(e) => failed.push(Failure {
                item: crate::preprocess::sample_key(&s.id, id),
                message: e.to_string(),
            }),
        }
    }
    (ok, failed)
}

/// Converts `inputs` into a cache at `out_dir`. `load` turns one input into
/// its scenarios (one per interchange line), each possibly a message
/// describing why it cannot be read; `name` labels an input in failures.
pub fn preprocess_into_cache<I, N, L>(
    inputs: &[I],
    name: N,
    load: L,
    cfg: &PreprocConfig,
    out_dir: &Path,
    opts: PipelineOptions,
) -> Result<PreprocessSummary, PipelineError>
where
    I: Sync,
    N: Fn(&I) -> String + Sync,
    L: Fn(&I) -> Vec<Result<Scenario, String>> + Sync,
{
    cfg.validate()?;
    let start = Instant::now();
    // Unit when the `parallel` feature is off.
    #[allow(clippy::let_unit_value)]
    let pool = build_pool(opts.threads)?;
    let threads = pool_threads(&pool);
    let mut writer = CacheWriter::create(out_dir, cfg)?;
    let mut failures = Vec::new();
    let mut scenarios = 0usize;

    for (b, batch) in inputs.chunks(BATCH_SIZE).enumerate() {
        let results = run_in(&pool, || {
            crate::map_indices(batch.len(), |i| {
                let loaded = load(&batch[i]);
                let multi = loaded.len() > 1;
                let mut encoded = Vec::new();
                let mut failed = Vec::new();
                let mut n_ok = 0usize;
                for (line, item) in loaded.into_iter().enumerate() {
                    match item {
                        Ok(s) => {
                            n_ok += 1;
                            let (e, f) = encode_scenario(&s, cfg);
                            encoded.extend(e);
                            failed.extend(f);
                        }
                        Err(message) => {
                            let base = name(&batch[i]);
                            let item = if multi { format!("{base}:{}", line + 1) } else { base };
                            failed.push(Failure { item, message });
                        }
                    }
                }
                Ok::<_, std::convert::Infallible>((n_ok, encoded, failed))
            })
        })
        .unwrap_or_else(|e| match e {});
        for (n_ok, encoded, failed) in results {
            for f in &failed {
                log::warn!("skipping {f}");
            }
            scenarios += n_ok;
            failures.extend(failed);
            for (key, payload) in encoded {
                writer.push_encoded(&key, &payload)?;
            }
        }
        if !opts.skip_bad && !failures.is_empty() {
            return Err(PipelineError::Failed(failures));
        }
        let done = (b * BATCH_SIZE + batch.len()).min(inputs.len());
        let elapsed = start.elapsed().as_secs_f64();
        log::info!(
            "preprocessed {done}/{} inputs, {} samples, {:.0} samples/s",
            inputs.len(),
            writer.len(),
            writer.len() as f64 / elapsed.max(1e-9)
        );
    }

    let samples = writer.len();
    let manifest = writer.finish()?;
    Ok(PreprocessSummary {
        manifest,
        inputs: inputs.len(),
        scenarios,
        samples,
        failures,
        threads,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// In-memory scenarios into a cache.
pub fn preprocess_scenarios(
    scenarios: &[Scenario],
    cfg: &PreprocConfig,
    out_dir: &Path,
    opts: PipelineOptions,
) -> Result<PreprocessSummary, PipelineError> {
    preprocess_into_cache(
        scenarios,
        |s| s.id.clone(),
        |s| vec![Ok(s.clone())],
        cfg,
        out_dir,
        opts,
    )
}

#[cfg(feature = "parallel")]
type Pool = rayon::ThreadPool;
#[cfg(not(feature = "parallel"))]
type Pool = ();

#[cfg(feature = "parallel")]
fn build_pool(threads: usize) -> Result<Pool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PipelineError::ThreadPool(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn build_pool(_threads: usize) -> Result<Pool, PipelineError> {
    Ok(())
}

#[cfg(feature = "parallel")]
fn pool_threads(pool: &Pool) -> usize {
    pool.current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn pool_threads(_pool: &Pool) -> usize {
    1
}

#[cfg(feature = "parallel")]
fn run_in<R: Send>(pool: &Pool, f: impl FnOnce() -> R + Send) -> R {
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn run_in<R>(_pool: &Pool, f: impl FnOnce() -> R) -> R {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{CacheReader, DATA_FILE};
    use crate::syngen::{generate_all, GenConfig};

    fn scenarios(n: usize) -> Vec<Scenario> {
        generate_all(&GenConfig {
            n_scenarios: n,
            seed: 11,
            density: 5.0,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn one_sample_per_focal_agent() {
        let scn = scenarios(4);
        let dir = tempfile::tempdir().unwrap();
        let cfg = PreprocConfig::default();
        let sum = preprocess_scenarios(&scn, &cfg, dir.path(), PipelineOptions::default()).unwrap();
        let expected: usize = scn.iter().map(|s| s.focal_agents.len()).sum();
        assert_eq!(sum.samples, expected);
        let r = CacheReader::open(dir.path()).unwrap();
        assert_eq!(r.len(), expected);
        assert!(sum.failures.is_empty());
    }

    #[test]
    fn thread_count_does_not_change_bytes() {
        let scn = scenarios(6);
        let cfg = PreprocConfig::default();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for (dir, threads) in [(&a, 1), (&b, 3)] {
            let opts = PipelineOptions { threads, skip_bad: false };
            preprocess_scenarios(&scn, &cfg, dir.path(), opts).unwrap();
        }
        let read = |d: &tempfile::TempDir| std::fs::read(d.path().join(DATA_FILE)).unwrap();
        assert_eq!(read(&a), read(&b));
    }

    #[test]
    fn failures_abort_unless_skipped() {
        let mut scn = scenarios(2);
        scn[1].focal_agents.push("ghost".into());
        let cfg = PreprocConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let err = preprocess_scenarios(&scn, &cfg, dir.path(), PipelineOptions::default());
        assert!(matches!(err, Err(PipelineError::Failed(f)) if f.len() == 1));
        let opts = PipelineOptions { threads: 1, skip_bad: true };
        let sum = preprocess_scenarios(&scn, &cfg, dir.path(), opts).unwrap();
        assert_eq!(sum.failures.len(), 1);
        assert!(sum.failures[0].item.ends_with("/ghost"));
    }
}
