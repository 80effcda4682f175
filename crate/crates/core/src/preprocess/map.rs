use crate::scenario::{LineType, MapPolyline};

use super::features::{map_point_row, MAP_CHANNELS};
use super::polyline::{filter_map, resample_polyline, ResampledPolyline};
use super::{PreprocConfig, PreprocessError};

/// Map polyline after resampling, ready to be chunked.
#[derive(Debug, Clone, PartialEq)]
pub struct MapLine {
    pub line_type: LineType,
    pub points: Vec<[f64; 2]>,
    pub directions: Vec<[f64; 2]>,
}

impl MapLine {
    pub fn from_resampled(line_type: LineType, r: ResampledPolyline) -> Self {
        Self {
            line_type,
            points: r.points,
            directions: r.directions,
        }
    }
}

/// Chunked map tensor: `L × P × F_m` features and an `L × P` mask.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapChunks {
    pub features: Vec<f64>,
    pub mask: Vec<bool>,
    pub num_chunks: usize,
}

/// Splits each line into `ceil(n / P)` chunks of at most `P` points; the tail
/// of the last chunk is zero-padded with a false mask.
pub fn chunk_map(lines: &[MapLine], points_per_chunk: usize, cfg: &PreprocConfig) -> MapChunks {
    let p = points_per_chunk;
    let num_chunks: usize = lines.iter().map(|l| l.points.len().div_ceil(p)).sum();
    let mut out = MapChunks {
        features: vec![0.0; num_chunks * p * MAP_CHANNELS],
        mask: vec![false; num_chunks * p],
        num_chunks,
    };
    let mut slot = 0;
    for line in lines {
        for (chunk_pts, chunk_dirs) in line.points.chunks(p).zip(line.directions.chunks(p)) {
            for (i, (&pt, &dir)) in chunk_pts.iter().zip(chunk_dirs).enumerate() {
                let idx = slot * p + i;
                out.mask[idx] = true;
                let row = &mut out.features[idx * MAP_CHANNELS..(idx + 1) * MAP_CHANNELS];
                map_point_row(row, pt, dir, line.line_type, cfg);
            }
            slot += 1;
        }
    }
    out
}

/// Clips an agent-frame map to range, resamples linear features and chunks them.
pub fn build_map_features(
    map: &[MapPolyline],
    cfg: &PreprocConfig,
) -> Result<MapChunks, PreprocessError> {
    let mut lines = Vec::new();
    for line in filter_map(map, cfg.map_range_m) {
        if line.points.len() == 1 {
            lines.push(MapLine {
                line_type: line.line_type,
                points: line.points,
                directions: vec![[0.0, 0.0]],
            });
            continue;
        }
        match resample_polyline(&line.points, cfg.map_resolution_m) {
            Ok(r) => lines.push(MapLine::from_resampled(line.line_type, r)),
            // Clipping can leave a sliver shorter than the degeneracy limit.
            Err(PreprocessError::DegeneratePolyline { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(chunk_map(&lines, cfg.points_per_chunk, cfg))
}
