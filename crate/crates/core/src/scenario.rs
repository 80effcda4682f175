//! Source-agnostic scenario description and its structural checks.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

use crate::{DT, FREQ_HZ, MAX_DURATION_S};

/// Tolerance on the spacing between consecutive timestamps.
pub const TIMESTAMP_TOL: f64 = 1e-9;
/// Minimum distance between consecutive polyline vertices.
pub const MIN_POINT_SPACING: f64 = 1e-6;
/// Reference index used when a document does not carry one (2 s at 10 Hz).
pub const DEFAULT_CURRENT_INDEX: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngleError {
    #[error("angle is not finite: {0}")]
    NonFinite(f64),
}

/// Wraps an angle into the half-open interval (−π, π].
///
/// −π maps to π so that every direction has a single representative.
pub fn wrap_angle(theta: f64) -> Result<f64, AngleError> {
    if !theta.is_finite() {
        return Err(AngleError::NonFinite(theta));
    }
    Ok(wrap_finite(theta))
}

pub(crate) fn wrap_finite(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut r = (theta + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r += TAU;
    }
    if r > PI {
        r -= TAU;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentType {
    Vehicle,
    Pedestrian,
    Cyclist,
    Other,
}

impl AgentType {
    pub const ALL: [AgentType; 4] = [
        AgentType::Vehicle,
        AgentType::Pedestrian,
        AgentType::Cyclist,
        AgentType::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgentType::Vehicle => "vehicle",
            AgentType::Pedestrian => "pedestrian",
            AgentType::Cyclist => "cyclist",
            AgentType::Other => "other",
        }
    }

    /// Maps a source class name onto the fixed taxonomy; unknown names become `Other`.
    pub fn from_source_name(name: &str) -> Self {
        match name.to_ascii_lowercase().as_str() {
            "vehicle" | "car" | "truck" | "bus" => AgentType::Vehicle,
            "pedestrian" => AgentType::Pedestrian,
            "cyclist" | "bicycle" => AgentType::Cyclist,
            _ => AgentType::Other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineType {
    LaneCenter,
    RoadLine,
    RoadEdge,
    Crosswalk,
    SpeedBump,
    StopSign,
    Other,
}

impl LineType {
    pub const ALL: [LineType; 7] = [
        LineType::LaneCenter,
        LineType::RoadLine,
        LineType::RoadEdge,
        LineType::Crosswalk,
        LineType::SpeedBump,
        LineType::StopSign,
        LineType::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LineType::LaneCenter => "lane_center",
            LineType::RoadLine => "road_line",
            LineType::RoadEdge => "road_edge",
            LineType::Crosswalk => "crosswalk",
            LineType::SpeedBump => "speed_bump",
            LineType::StopSign => "stop_sign",
            LineType::Other => "other",
        }
    }

    pub fn from_source_name(name: &str) -> Self {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == name)
            .unwrap_or(LineType::Other)
    }

    /// Point-like features need a single vertex; everything else needs two.
    pub fn min_points(self) -> usize {
        if self == LineType::StopSign {
            1
        } else {
            2
        }
    }
}

/// Kinematic state of one agent at one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub heading: f64,
}

impl AgentState {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.vx == 0.0 && self.vy == 0.0 && self.heading == 0.0
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.vx, self.vy, self.heading]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Bounding-box footprint. Carried as metadata only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSize {
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentTrack {
    pub id: String,
    pub agent_type: AgentType,
    pub states: Vec<AgentState>,
    pub valid: Vec<bool>,
    pub size: Option<BoxSize>,
}

impl AgentTrack {
    pub fn is_valid_at(&self, t: usize) -> bool {
        self.valid.get(t).copied().unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapPolyline {
    pub id: String,
    pub line_type: LineType,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub source: String,
    pub city: String,
    pub freq_hz: u32,
    /// Index of the reference ("current") timestep in `timestamps`.
    pub current_index: usize,
    pub timestamps: Vec<f64>,
    pub tracks: Vec<AgentTrack>,
    pub map: Vec<MapPolyline>,
    pub focal_agents: Vec<String>,
}

impl Scenario {
    pub fn track(&self, id: &str) -> Option<&AgentTrack> {
        self.tracks.iter().find(|t| t.id == id)
    }

    pub fn num_steps(&self) -> usize {
        self.timestamps.len()
    }

    /// Drops trailing timesteps beyond the maximum scenario duration.
    pub fn truncate_to_max_duration(&mut self) {
        let max_steps = (MAX_DURATION_S / DT).round() as usize + 1;
        if self.timestamps.len() <= max_steps {
            return;
        }
        self.timestamps.truncate(max_steps);
        for track in &mut self.tracks {
            track.states.truncate(max_steps);
            track.valid.truncate(max_steps);
        }
    }
}

/// Rigid transform from global coordinates into an agent frame.
///
/// A global point `p` maps to `R(-rotation) * (p - translation)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransformRecord {
    pub translation: [f64; 2],
    pub rotation: f64,
}

impl TransformRecord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn apply_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.rotation.sin_cos();
        let dx = p[0] - self.translation[0];
        let dy = p[1] - self.translation[1];
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn apply_vector(&self, v: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.rotation.sin_cos();
        [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
    }

    pub fn apply_heading(&self, heading: f64) -> f64 {
        wrap_finite(heading - self.rotation)
    }

    pub fn invert_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.rotation.sin_cos();
        [
            c * p[0] - s * p[1] + self.translation[0],
            s * p[0] + c * p[1] + self.translation[1],
        ]
    }

    pub fn invert_heading(&self, heading: f64) -> f64 {
        wrap_finite(heading + self.rotation)
    }
}

/// One structural problem found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Lists every invariant violation of a scenario. Empty means valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = s.timestamps.len();

    if s.freq_hz != FREQ_HZ {
        out.push(Violation::new(
            "freq_hz",
            format!("expected {FREQ_HZ} Hz, got {}", s.freq_hz),
        ));
    }
    if n == 0 {
        out.push(Violation::new("timestamps", "no timestamps"));
    }
    for (i, t) in s.timestamps.iter().enumerate() {
        if !t.is_finite() {
            out.push(Violation::new(format!("timestamps[{i}]"), "not finite"));
        }
    }
    for (i, w) in s.timestamps.windows(2).enumerate() {
        let step = w[1] - w[0];
        if (step - DT).abs() > TIMESTAMP_TOL {
            out.push(Violation::new(
                format!("timestamps[{}]", i + 1),
                format!("step {step} differs from {DT} s"),
            ));
        }
    }
    if n > 0 {
        let duration = (n - 1) as f64 * DT;
        if duration > MAX_DURATION_S + TIMESTAMP_TOL {
            out.push(Violation::new(
                "timestamps",
                format!("duration {duration} s exceeds {MAX_DURATION_S} s"),
            ));
        }
    }
    if s.current_index >= n.max(1) {
        out.push(Violation::new(
            "current_index",
            format!("index {} outside {n} timesteps", s.current_index),
        ));
    }

    let mut ids = HashSet::new();
    for (ti, track) in s.tracks.iter().enumerate() {
        let base = format!("tracks[{ti}]");
        if !ids.insert(track.id.as_str()) {
            out.push(Violation::new(
                format!("{base}.id"),
                format!("duplicate track id {:?}", track.id),
            ));
        }
        if track.states.len() != n {
            out.push(Violation::new(
                format!("{base}.states"),
                format!("length {} != {n} timestamps", track.states.len()),
            ));
        }
        if track.valid.len() != n {
            out.push(Violation::new(
                format!("{base}.valid"),
                format!("length {} != {n} timestamps", track.valid.len()),
            ));
        }
        if !track.valid.iter().any(|&v| v) {
            out.push(Violation::new(format!("{base}.valid"), "no valid timestep"));
        }
        for (t, (state, &valid)) in track.states.iter().zip(&track.valid).enumerate() {
            let path = format!("{base}.states[{t}]");
            if !state.is_finite() {
                out.push(Violation::new(path, "non-finite state"));
            } else if valid {
                if !(state.heading > -PI && state.heading <= PI) {
                    out.push(Violation::new(path, "heading outside (−π, π]"));
                }
            } else if !state.is_zero() {
                out.push(Violation::new(path, "invalid timestep carries non-zero state"));
            }
        }
        if let Some(size) = track.size {
            if !(size.length.is_finite() && size.width.is_finite())
                || size.length < 0.0
                || size.width < 0.0
            {
                out.push(Violation::new(format!("{base}.size"), "size must be finite and ≥ 0"));
            }
        }
    }

    for (mi, line) in s.map.iter().enumerate() {
        let base = format!("map[{mi}]");
        let min = line.line_type.min_points();
        if line.points.len() < min {
            out.push(Violation::new(
                format!("{base}.points"),
                format!("{} needs at least {min} points", line.line_type.as_str()),
            ));
        }
        for (pi, p) in line.points.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                out.push(Violation::new(format!("{base}.points[{pi}]"), "non-finite coordinate"));
            }
        }
        for (pi, w) in line.points.windows(2).enumerate() {
            let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            if !(d > MIN_POINT_SPACING) {
                out.push(Violation::new(
                    format!("{base}.points[{}]", pi + 1),
                    "duplicate consecutive point",
                ));
            }
        }
    }

    for (fi, id) in s.focal_agents.iter().enumerate() {
        let path = format!("focal_agents[{fi}]");
        match s.track(id) {
            None => out.push(Violation::new(path, format!("unknown agent {id:?}"))),
            Some(track) if !track.is_valid_at(s.current_index) => out.push(Violation::new(
                path,
                format!("agent {id:?} invalid at reference step {}", s.current_index),
            )),
            Some(_) => {}
        }
    }
    out
}
