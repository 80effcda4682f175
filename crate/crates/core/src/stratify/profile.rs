//! Dataset-level distribution of trajectory types and Kalman difficulty.

use serde::Serialize;

use super::{label_sample, DifficultyBins, KalmanParams, StratifyError, TrajectoryType};
use crate::io::CacheReader;
use crate::preprocess::UnifiedSample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeShare {
    pub label: &'static str,
    pub count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub label: String,
    pub lower: f64,
    /// `None` for the overflow bin.
    pub upper: Option<f64>,
    pub count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetProfile {
    pub sample_count: u64,
    pub trajectory_types: Vec<TypeShare>,
    pub difficulty_bins: String,
    pub bin_edges: Vec<f64>,
    pub difficulty_histogram: Vec<HistogramBin>,
    /// Samples whose history was too short for the filter.
    pub unscored: u64,
    pub kalman: KalmanParams,
}

#[derive(Debug, Clone, Default)]
struct Counts {
    types: [u64; 8],
    bins: Vec<u64>,
    unscored: u64,
    total: u64,
}

impl Counts {
    fn new(n_bins: usize) -> Self {
        Self {
            bins: vec![0; n_bins],
            ..Default::default()
        }
    }

    fn add(
        mut self,
        s: &UnifiedSample,
        params: &KalmanParams,
        bins: &DifficultyBins,
    ) -> Result<Self, StratifyError> {
        let label = label_sample(s, params, bins)?;
        self.types[label.traj_type.index()] += 1;
        match label.difficulty_bin {
            Some(b) => self.bins[b] += 1,
            None => self.unscored += 1,
        }
        self.total += 1;
        Ok(self)
    }

    #[cfg(feature = "parallel")]
    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.types.iter_mut().zip(other.types) {
            *a += b;
        }
        for (a, b) in self.bins.iter_mut().zip(other.bins) {
            *a += b;
        }
        self.unscored += other.unscored;
        self.total += other.total;
        self
    }

    fn into_profile(self, params: &KalmanParams, bins: &DifficultyBins) -> DatasetProfile {
        let pct = |c: u64, of: u64| if of == 0 { 0.0 } else { 100.0 * c as f64 / of as f64 };
        let scored = self.total - self.unscored;
        DatasetProfile {
            sample_count: self.total,
            trajectory_types: TrajectoryType::ALL
                .iter()
                .map(|t| TypeShare {
                    label: t.as_str(),
                    count: self.types[t.index()],
                    percent: pct(self.types[t.index()], self.total),
                })
                .collect(),
            difficulty_bins: bins.name.clone(),
            bin_edges: bins.edges.clone(),
            difficulty_histogram: self
                .bins
                .iter()
                .enumerate()
                .map(|(i, &count)| HistogramBin {
                    label: bins.labels[i].clone(),
                    lower: bins.edges[i],
                    upper: bins.edges.get(i + 1).copied(),
                    count,
                    percent: pct(count, scored),
                })
                .collect(),
            unscored: self.unscored,
            kalman: params.clone(),
        }
    }
}

/// Profiles samples held in memory.
pub fn profile_samples<'a>(
    samples: impl IntoIterator<Item = &'a UnifiedSample>,
    params: &KalmanParams,
    bins: &DifficultyBins,
) -> Result<DatasetProfile, StratifyError> {
    let mut counts = Counts::new(bins.len());
    for s in samples {
        counts = counts.add(s, params, bins)?;
    }
    if counts.total == 0 {
        return Err(StratifyError::EmptyCache);
    }
    Ok(counts.into_profile(params, bins))
}

/// Profiles every sample of a cache; samples are scored in parallel and the
/// counts merged, so the result does not depend on scheduling.
pub fn profile_dataset(
    cache: &CacheReader,
    params: &KalmanParams,
    bins: &DifficultyBins,
) -> Result<DatasetProfile, StratifyError> {
    if cache.is_empty() {
        return Err(StratifyError::EmptyCache);
    }
    params.validate()?;
    let counts = fold_indices(cache.len(), bins.len(), |acc, i| {
        let s = cache.get(i)?;
        acc.add(&s, params, bins)
    })?;
    Ok(counts.into_profile(params, bins))
}

#[cfg(feature = "parallel")]
fn fold_indices<F>(n: usize, n_bins: usize, f: F) -> Result<Counts, StratifyError>
where
    F: Fn(Counts, usize) -> Result<Counts, StratifyError> + Sync,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .try_fold(|| Counts::new(n_bins), &f)
        .try_reduce(|| Counts::new(n_bins), |a, b| Ok(a.merge(b)))
}

#[cfg(not(feature = "parallel"))]
fn fold_indices<F>(n: usize, n_bins: usize, f: F) -> Result<Counts, StratifyError>
where
    F: Fn(Counts, usize) -> Result<Counts, StratifyError>,
{
    (0..n).try_fold(Counts::new(n_bins), f)
}
