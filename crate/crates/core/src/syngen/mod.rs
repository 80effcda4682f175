//! Procedural synthetic scenarios: chained road blocks and vehicles driving
//! maneuver templates at constant speed.
//!
//! Every scenario draws from its own ChaCha8 stream keyed by
//! `(seed, index)`, so generation is reproducible in any order and on any
//! number of threads.

mod agents;
mod map;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agents::{generate_agents, Maneuver};
pub use map::{generate_map, BlockType};

use crate::scenario::{AgentType, Scenario};
use crate::{DT, FREQ_HZ, MAX_DURATION_S};

/// Name of the random number generator, echoed in generation manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3), seed_from_u64(seed), stream = scenario index";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("map has no lane centers")]
    NoLanes,
}

/// Probabilities over the generated maneuvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManeuverMix {
    pub straight: f64,
    pub left_turn: f64,
    pub right_turn: f64,
    pub u_turn: f64,
    pub stationary: f64,
}

impl Default for ManeuverMix {
    fn default() -> Self {
        Self {
            straight: 0.6,
            left_turn: 0.12,
            right_turn: 0.12,
            u_turn: 0.06,
            stationary: 0.1,
        }
    }
}

impl ManeuverMix {
    pub fn weights(&self) -> [f64; 5] {
        [
            self.straight,
            self.left_turn,
            self.right_turn,
            self.u_turn,
            self.stationary,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub n_scenarios: usize,
    pub duration_s: f64,
    /// Time of the reference step; history before it, future after.
    pub reference_time_s: f64,
    /// Vehicles per 100 m of lane center.
    pub density: f64,
    pub n_blocks: usize,
    pub block_types: Vec<BlockType>,
    pub maneuver_mix: ManeuverMix,
    /// Inclusive speed range for moving vehicles, m/s.
    pub speed_range: [f64; 2],
    pub lane_width: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_scenarios: 100,
            duration_s: MAX_DURATION_S,
            reference_time_s: 2.0,
            density: 15.0,
            n_blocks: 2,
            block_types: BlockType::ALL.to_vec(),
            maneuver_mix: ManeuverMix::default(),
            speed_range: [5.0, 15.0],
            lane_width: 3.5,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Config(m.to_string()));
        let w = self.maneuver_mix.weights();
        if w.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("maneuver_mix entries must be finite and non-negative");
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GenError::Config(format!("maneuver_mix sums to {sum}, expected 1")));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return bad("density must be positive");
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0 && self.duration_s <= MAX_DURATION_S + 1e-9) {
            return Err(GenError::Config(format!(
                "duration_s must be in (0, {MAX_DURATION_S}], got {}",
                self.duration_s
            )));
        }
        if !(self.reference_time_s >= 0.0 && self.reference_time_s <= self.duration_s) {
            return bad("reference_time_s must lie within the duration");
        }
        if self.n_blocks == 0 {
            return bad("n_blocks must be at least 1");
        }
        if self.block_types.is_empty() {
            return bad("block_types must not be empty");
        }
        let [lo, hi] = self.speed_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return bad("speed_range must satisfy 0 < min <= max");
        }
        if !(self.lane_width.is_finite() && self.lane_width > 0.0) {
            return bad("lane_width must be positive");
        }
        Ok(())
    }

    pub fn num_steps(&self) -> usize {
        (self.duration_s / DT).round() as usize + 1
    }

    pub fn reference_index(&self) -> usize {
        (self.reference_time_s / DT).round() as usize
    }
}

pub fn scenario_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn scenario_id(seed: u64, index: u64) -> String {
    format!("syn-{seed}-{index:06}")
}

/// Scenario `index` of the stream `seed`, with each track's maneuver.
pub fn generate_labeled(
    seed: u64,
    index: u64,
    cfg: &GenConfig,
) -> Result<(Scenario, Vec<Maneuver>), GenError> {
    cfg.validate()?;
    let mut rng = scenario_rng(seed, index);
    let map = generate_map(&mut rng, cfg);
    let (tracks, maneuvers): (Vec<_>, Vec<_>) =
        generate_agents(&map, &mut rng, cfg)?.into_iter().unzip();
    let t_ref = cfg.reference_index();
    let focal_agents = tracks
        .iter()
        .filter(|t| t.agent_type == AgentType::Vehicle && t.is_valid_at(t_ref))
        .map(|t| t.id.clone())
        .collect();
    let scenario = Scenario {
        id: scenario_id(seed, index),
        source: "syngen".into(),
        city: "synthetic".into(),
        freq_hz: FREQ_HZ,
        current_index: t_ref,
        timestamps: (0..cfg.num_steps()).map(|k| k as f64 / FREQ_HZ as f64).collect(),
        tracks,
        map,
        focal_agents,
    };
    Ok((scenario, maneuvers))
}

pub fn generate_scenario(seed: u64, index: u64, cfg: &GenConfig) -> Result<Scenario, GenError> {
    generate_labeled(seed, index, cfg).map(|(s, _)| s)
}

/// Scenarios `0..cfg.n_scenarios` of `cfg.seed`, in index order.
pub fn generate_all(cfg: &GenConfig) -> Result<Vec<Scenario>, GenError> {
    cfg.validate()?;
    crate::map_indices(cfg.n_scenarios, |i| generate_scenario(cfg.seed, i as u64, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_scenario;
    use crate::scenario::validate_scenario;

    #[test]
    fn default_is_valid_and_full_length() {
        let s = generate_scenario(7, 0, &GenConfig::default()).unwrap();
        assert_eq!(s.num_steps(), 81);
        assert_eq!(validate_scenario(&s), vec![]);
        assert!(!s.focal_agents.is_empty());
        assert_eq!(s.id, "syn-7-000000");
    }

    #[test]
    fn deterministic_per_index() {
        let cfg = GenConfig::default();
        let a = write_scenario(&generate_scenario(3, 5, &cfg).unwrap());
        let b = write_scenario(&generate_scenario(3, 5, &cfg).unwrap());
        let c = write_scenario(&generate_scenario(3, 6, &cfg).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_configs() {
        let long = GenConfig { duration_s: 9.0, ..Default::default() };
        assert!(matches!(long.validate(), Err(GenError::Config(_))));
        let mut mix = GenConfig::default();
        mix.maneuver_mix.straight += 0.1;
        assert!(mix.validate().is_err());
        let dens = GenConfig { density: 0.0, ..Default::default() };
        assert!(dens.validate().is_err());
    }

    #[test]
    fn many_scenarios_validate() {
        let cfg = GenConfig { n_scenarios: 50, ..Default::default() };
        for s in generate_all(&cfg).unwrap() {
            assert_eq!(validate_scenario(&s), vec![], "{}", s.id);
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = GenConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<GenConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<GenConfig>(r#"{"sede": 1}"#).is_err());
    }
}
