use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh64::xxh64;

use crate::MAX_DURATION_S;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid preprocessing config: {field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

/// Agent feature channels that can be zeroed before samples reach a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum MaskedAttribute {
    Position,
    Velocity,
    Acceleration,
    Heading,
    AgentType,
    Timestep,
    MapDirection,
}

/// Knobs of the sample builder. Defaults are 2 s history, 6 s future,
/// 100 m map radius at 0.5 m spacing, 20 points per map chunk and 32 neighbors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocConfig {
    pub past_sec: f64,
    pub future_sec: f64,
    pub map_range_m: f64,
    pub map_resolution_m: f64,
    pub points_per_chunk: usize,
    pub max_neighbors: usize,
    pub masked_attributes: Vec<MaskedAttribute>,
}

impl Default for PreprocConfig {
    fn default() -> Self {
        Self {
            past_sec: 2.0,
            future_sec: 6.0,
            map_range_m: 100.0,
            map_resolution_m: 0.5,
            points_per_chunk: 20,
            max_neighbors: 32,
            masked_attributes: Vec::new(),
        }
    }
}

impl PreprocConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |field, message: String| Err(ConfigError { field, message });
        if !(self.past_sec > 0.0 && self.past_sec <= MAX_DURATION_S) {
            return err("past_sec", format!("{} not in (0, 8]", self.past_sec));
        }
        if !(1.0..=MAX_DURATION_S).contains(&self.future_sec) {
            return err("future_sec", format!("{} not in [1, 8]", self.future_sec));
        }
        if self.past_sec + self.future_sec > MAX_DURATION_S + 1e-9 {
            return err(
                "future_sec",
                format!("past + future = {} exceeds 8 s", self.past_sec + self.future_sec),
            );
        }
        if !(self.map_range_m > 0.0 && self.map_range_m <= 500.0) {
            return err("map_range_m", format!("{} not in (0, 500]", self.map_range_m));
        }
        if !(0.2..=2.0).contains(&self.map_resolution_m) {
            return err(
                "map_resolution_m",
                format!("{} not in [0.2, 2]", self.map_resolution_m),
            );
        }
        if self.points_per_chunk < 2 {
            return err("points_per_chunk", "must be at least 2".into());
        }
        Ok(())
    }

    /// Number of history steps, including the reference step.
    pub fn past_len(&self) -> usize {
        (self.past_sec * 10.0).round() as usize + 1
    }

    pub fn future_len(&self) -> usize {
        (self.future_sec * 10.0).round() as usize
    }

    pub fn agent_channels(&self) -> usize {
        super::AGENT_BASE_CHANNELS + self.past_len()
    }

    pub fn is_masked(&self, attr: MaskedAttribute) -> bool {
        self.masked_attributes.contains(&attr)
    }

    /// Canonical serialization: fixed key order, shortest round-trip floats,
    /// masked attributes sorted and deduplicated.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.masked_attributes.sort();
        c.masked_attributes.dedup();
        serde_json::to_string(&c).expect("config serializes")
    }

    pub fn fingerprint(&self) -> u64 {
        xxh64(self.canonical_json().as_bytes(), 0)
    }

    /// Names of fields whose values differ between two configs.
    pub fn diff(&self, other: &PreprocConfig) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.past_sec != other.past_sec {
            out.push("past_sec");
        }
        if self.future_sec != other.future_sec {
            out.push("future_sec");
        }
        if self.map_range_m != other.map_range_m {
            out.push("map_range_m");
        }
        if self.map_resolution_m != other.map_resolution_m {
            out.push("map_resolution_m");
        }
        if self.points_per_chunk != other.points_per_chunk {
            out.push("points_per_chunk");
        }
        if self.max_neighbors != other.max_neighbors {
            out.push("max_neighbors");
        }
        let mut a = self.masked_attributes.clone();
        let mut b = other.masked_attributes.clone();
        a.sort();
        a.dedup();
        b.sort();
        b.dedup();
        if a != b {
            out.push("masked_attributes");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_sized() {
        let c = PreprocConfig::default();
        c.validate().unwrap();
        assert_eq!(c.past_len(), 21);
        assert_eq!(c.future_len(), 60);
        assert_eq!(c.agent_channels(), 33);
    }

    #[test]
    fn window_longer_than_eight_seconds_is_rejected() {
        let c = PreprocConfig { past_sec: 3.0, future_sec: 6.0, ..Default::default() };
        assert_eq!(c.validate().unwrap_err().field, "future_sec");
    }

    #[test]
    fn resolution_out_of_range_is_rejected() {
        let c = PreprocConfig { map_resolution_m: 0.1, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = PreprocConfig::default();
        let b = PreprocConfig { future_sec: 4.0, ..Default::default() };
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), PreprocConfig::default().fingerprint());
        assert_eq!(a.diff(&b), vec!["future_sec"]);
        let m1 = PreprocConfig {
            masked_attributes: vec![MaskedAttribute::Velocity, MaskedAttribute::Position],
            ..Default::default()
        };
        let m2 = PreprocConfig {
            masked_attributes: vec![MaskedAttribute::Position, MaskedAttribute::Velocity],
            ..Default::default()
        };
        assert_eq!(m1.fingerprint(), m2.fingerprint());
    }

    #[test]
    fn parses_partial_config_file() {
        let c: PreprocConfig = serde_json::from_str(r#"{"future_sec": 4.0}"#).unwrap();
        assert_eq!(c.future_sec, 4.0);
        assert_eq!(c.past_sec, 2.0);
        assert!(serde_json::from_str::<PreprocConfig>(r#"{"futur_sec": 4.0}"#).is_err());
    }
}
