//! File formats: scenario interchange, prediction files and the sample cache.

mod cache;
pub mod codec;
mod interchange;
mod predictions;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scenario::Violation;

pub use cache::{
    read_cache, write_cache, CacheManifest, CacheReader, CacheWriter, DATA_FILE, FORMAT_NAME,
    FORMAT_VERSION, MANIFEST_FILE,
};
pub use interchange::{parse_scenario, parse_scenario_lines, write_scenario};
pub use predictions::{
    parse_predictions, write_prediction_line, write_predictions, PredictionLimits,
    PredictionRecord, DEFAULT_MAX_MODES, PROB_SUM_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid scenario: {}", join(.0))]
    Semantic(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictionError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{key}: probabilities sum to {sum}, expected 1")]
    Probability { key: String, sum: f64 },
    #[error("{key}: {message}")]
    Shape { key: String, message: String },
    #[error("{key}: {modes} modes exceed the maximum of {max}")]
    TooManyModes { key: String, modes: usize, max: usize },
    #[error("duplicate prediction key {0:?}")]
    DuplicateKey(String),
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("checksum mismatch in cache entry {entry}")]
    Checksum { entry: String },
    #[error("cache config mismatch: {}", fields.join(", "))]
    ConfigMismatch { fields: Vec<String> },
    #[error("malformed cache: {0}")]
    Format(String),
    #[error("duplicate sample key {0:?}")]
    DuplicateKey(String),
    #[error("unknown sample key {0:?}")]
    UnknownKey(String),
    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
}

impl Clone for CacheError {
    fn clone(&self) -> Self {
        match self {
            CacheError::Io(e) => CacheError::Io(std::io::Error::new(e.kind(), e.to_string())),
            CacheError::Checksum { entry } => CacheError::Checksum { entry: entry.clone() },
            CacheError::ConfigMismatch { fields } => {
                CacheError::ConfigMismatch { fields: fields.clone() }
            }
            CacheError::Format(m) => CacheError::Format(m.clone()),
            CacheError::DuplicateKey(k) => CacheError::DuplicateKey(k.clone()),
            CacheError::UnknownKey(k) => CacheError::UnknownKey(k.clone()),
            CacheError::IndexOutOfRange { index, len } => {
                CacheError::IndexOutOfRange { index: *index, len: *len }
            }
        }
    }
}

impl PartialEq for CacheError {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

/// Interchange files (`*.jsonl`) directly under `dir`, sorted by name.
pub fn list_scenario_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}
