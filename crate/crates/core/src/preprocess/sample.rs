use std::cmp::Ordering;

use crate::scenario::{AgentType, Scenario, TransformRecord};

use super::features::{agent_features, MAP_CHANNELS};
use super::frame::{agent_transform, transform_polyline, transform_state};
use super::map::build_map_features;
use super::window::window_track;
use super::{PreprocConfig, PreprocessError};

pub fn sample_key(scenario_id: &str, agent_id: &str) -> String {
    format!("{scenario_id}/{agent_id}")
}

/// One agent-centric model input.
///
/// Tensors are stored row-major in flat vectors:
/// `focal_features` is `T_p × F_a`, `neighbor_features` is `N × T_p × F_a`,
/// `map_features` is `L × P × F_m`. Wherever a mask is false the matching
/// feature slots are exactly zero.
///
/// Besides the model inputs the sample carries the focal agent's unmasked
/// history positions and future headings/speeds, which stratification needs.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedSample {
    pub sample_key: String,
    pub agent_type: AgentType,
    pub config_fingerprint: u64,
    pub transform: TransformRecord,
    pub past_len: usize,
    pub future_len: usize,
    pub agent_channels: usize,
    pub max_neighbors: usize,
    pub points_per_chunk: usize,
    pub num_chunks: usize,
    pub focal_features: Vec<f64>,
    pub focal_mask: Vec<bool>,
    pub neighbor_features: Vec<f64>,
    pub neighbor_mask: Vec<bool>,
    pub map_features: Vec<f64>,
    pub map_mask: Vec<bool>,
    pub gt_future: Vec<[f64; 2]>,
    pub gt_mask: Vec<bool>,
    pub gt_future_heading: Vec<f64>,
    pub gt_future_speed: Vec<f64>,
    pub history_xy: Vec<[f64; 2]>,
}

impl UnifiedSample {
    pub fn map_channels(&self) -> usize {
        MAP_CHANNELS
    }

    pub fn focal_row(&self, t: usize) -> &[f64] {
        let f = self.agent_channels;
        &self.focal_features[t * f..(t + 1) * f]
    }

    pub fn neighbor_row(&self, n: usize, t: usize) -> &[f64] {
        let f = self.agent_channels;
        let off = (n * self.past_len + t) * f;
        &self.neighbor_features[off..off + f]
    }

    pub fn map_row(&self, l: usize, p: usize) -> &[f64] {
        let off = (l * self.points_per_chunk + p) * MAP_CHANNELS;
        &self.map_features[off..off + MAP_CHANNELS]
    }

    /// Number of neighbor slots with at least one valid step.
    pub fn num_neighbors(&self) -> usize {
        (0..self.max_neighbors)
            .filter(|&n| self.neighbor_mask[n * self.past_len..(n + 1) * self.past_len].contains(&true))
            .count()
    }

    pub fn last_valid_future(&self) -> Option<usize> {
        self.gt_mask.iter().rposition(|&m| m)
    }
}

/// Converts one (scenario, focal agent) pair into a [`UnifiedSample`].
///
/// Neighbors are the other agents valid at `t_ref`, nearest first, ties
/// broken by agent id; at most `max_neighbors` are kept.
pub fn build_sample(
    s: &Scenario,
    agent_id: &str,
    t_ref: usize,
    cfg: &PreprocConfig,
) -> Result<UnifiedSample, PreprocessError> {
    cfg.validate()?;
    let tf = agent_transform(s, agent_id, t_ref)?;
    let focal = s.track(agent_id).expect("checked by agent_transform");

    let t_p = cfg.past_len();
    let t_f = cfg.future_len();
    let f_a = cfg.agent_channels();

    let mut w = window_track(focal, t_ref, cfg)?;
    for st in w.past.iter_mut().chain(w.future.iter_mut()) {
        *st = transform_state(&tf, st);
    }
    zero_invalid(&mut w.past, &w.past_mask);
    zero_invalid(&mut w.future, &w.future_mask);
    if !w.future_mask.contains(&true) {
        return Err(PreprocessError::EmptyFuture(agent_id.to_string()));
    }
    let focal_features = agent_features(&w.past, &w.past_mask, focal.agent_type, cfg);

    let mut candidates: Vec<(f64, &str, usize)> = s
        .tracks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.id != agent_id && t.is_valid_at(t_ref))
        .map(|(i, t)| {
            let p = tf.apply_point(t.states[t_ref].position());
            (p[0].hypot(p[1]), t.id.as_str(), i)
        })
        .collect();
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.1.cmp(b.1))
    });
    candidates.truncate(cfg.max_neighbors);

    let n = cfg.max_neighbors;
    let mut neighbor_features = vec![0.0; n * t_p * f_a];
    let mut neighbor_mask = vec![false; n * t_p];
    for (slot, &(_, _, ti)) in candidates.iter().enumerate() {
        let track = &s.tracks[ti];
        let mut nw = window_track(track, t_ref, cfg)?;
        for (st, &valid) in nw.past.iter_mut().zip(&nw.past_mask) {
            if valid {
                *st = transform_state(&tf, st);
            }
        }
        let feats = agent_features(&nw.past, &nw.past_mask, track.agent_type, cfg);
        neighbor_features[slot * t_p * f_a..(slot + 1) * t_p * f_a].copy_from_slice(&feats);
        neighbor_mask[slot * t_p..(slot + 1) * t_p].copy_from_slice(&nw.past_mask);
    }

    let local_map: Vec<_> = s.map.iter().map(|l| transform_polyline(&tf, l)).collect();
    let map = build_map_features(&local_map, cfg)?;

    let gt_future = w.future_positions();
    let gt_future_heading = w.future.iter().map(|st| st.heading).collect();
    let gt_future_speed = w.future.iter().map(|st| st.speed()).collect();
    let history_xy = w.past.iter().map(|st| st.position()).collect();

    Ok(UnifiedSample {
        sample_key: sample_key(&s.id, agent_id),
        agent_type: focal.agent_type,
        config_fingerprint: cfg.fingerprint(),
        transform: tf,
        past_len: t_p,
        future_len: t_f,
        agent_channels: f_a,
        max_neighbors: n,
        points_per_chunk: cfg.points_per_chunk,
        num_chunks: map.num_chunks,
        focal_features,
        focal_mask: w.past_mask,
        neighbor_features,
        neighbor_mask,
        map_features: map.features,
        map_mask: map.mask,
        gt_future,
        gt_mask: w.future_mask,
        gt_future_heading,
        gt_future_speed,
        history_xy,
    })
}

fn zero_invalid(states: &mut [crate::scenario::AgentState], mask: &[bool]) {
    for (st, &m) in states.iter_mut().zip(mask) {
        if !m {
            *st = Default::default();
        }
    }
}
