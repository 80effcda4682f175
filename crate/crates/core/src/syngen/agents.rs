//! Vehicles spawned on lane centers, each driving one maneuver template at
//! constant speed.
//!
//! The spawn point is the vehicle's pose at the reference step. The history
//! is a straight constant-velocity approach along the lane tangent. The
//! future is a sequence of line and arc segments, then a straight run-out.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GenConfig, GenError};
use crate::scenario::{wrap_finite, AgentState, AgentTrack, AgentType, BoxSize, LineType, MapPolyline};
use crate::stratify::TrajectoryType;
use crate::DT;

/// Seconds after the reference step at which a 90° turn may begin.
const TURN_ONSET_S: [f64; 2] = [0.0, 1.5];
/// Duration of a 90° turn, s.
const TURN_DURATION_S: [f64; 2] = [1.5, 3.0];
const U_TURN_ONSET_S: [f64; 2] = [0.0, 0.3];
const U_TURN_RADIUS: [f64; 2] = [3.0, 4.0];
const U_TURN_SPEED: [f64; 2] = [4.0, 8.0];
/// A u-turn sweeps `π − δ`; a full `π` would alias left and right headings.
const U_TURN_SHORTFALL_RAD: [f64; 2] = [5.0 * PI / 180.0, 15.0 * PI / 180.0];
const VEHICLE_SIZE: BoxSize = BoxSize { length: 4.5, width: 2.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Maneuver {
    Straight,
    LeftTurn,
    RightTurn,
    LeftUTurn,
    RightUTurn,
    Stationary,
}

impl Maneuver {
    /// Class the taxonomy is expected to assign.
    pub fn expected_type(self) -> TrajectoryType {
        match self {
            Maneuver::Straight => TrajectoryType::Straight,
            Maneuver::LeftTurn => TrajectoryType::LeftTurn,
            Maneuver::RightTurn => TrajectoryType::RightTurn,
            Maneuver::LeftUTurn => TrajectoryType::LeftUTurn,
            Maneuver::RightUTurn => TrajectoryType::RightUTurn,
            Maneuver::Stationary => TrajectoryType::Stationary,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Line(f64),
    /// Signed sweep, positive to the left.
    Arc { radius: f64, sweep: f64 },
}

impl Segment {
    fn length(&self) -> f64 {
        match *self {
            Segment::Line(l) => l,
            Segment::Arc { radius, sweep } => radius * sweep.abs(),
        }
    }

    /// Pose after travelling `s` (0 ≤ s ≤ length) from `(p, h)`.
    fn pose_at(&self, p: [f64; 2], h: f64, s: f64) -> ([f64; 2], f64) {
        match *self {
            Segment::Line(_) => ([p[0] + s * h.cos(), p[1] + s * h.sin()], h),
            Segment::Arc { radius, sweep } => {
                let side = sweep.signum();
                let c = [p[0] - side * radius * h.sin(), p[1] + side * radius * h.cos()];
                let h2 = h + side * s / radius;
                ([c[0] + side * radius * h2.sin(), c[1] - side * radius * h2.cos()], h2)
            }
        }
    }
}

struct Path {
    start: [f64; 2],
    heading: f64,
    segments: Vec<Segment>,
}

impl Path {
    /// Pose at signed arc length `s` from the spawn point.
    fn pose(&self, s: f64) -> ([f64; 2], f64) {
        let (mut p, mut h) = (self.start, self.heading);
        let mut rest = s;
        if rest > 0.0 {
            for seg in &self.segments {
                let len = seg.length();
                if rest <= len {
                    return seg.pose_at(p, h, rest);
                }
                (p, h) = seg.pose_at(p, h, len);
                rest -= len;
            }
        }
        ([p[0] + rest * h.cos(), p[1] + rest * h.sin()], h)
    }
}

struct Spawner {
    /// `(start, end, cumulative length at start)` per lane-center segment.
    segments: Vec<([f64; 2], [f64; 2], f64)>,
    total: f64,
}

impl Spawner {
    fn new(map: &[MapPolyline]) -> Self {
        let mut segments = Vec::new();
        let mut total = 0.0;
        for line in map.iter().filter(|l| l.line_type == LineType::LaneCenter) {
            for w in line.points.windows(2) {
                segments.push((w[0], w[1], total));
                total += (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            }
        }
        Self { segments, total }
    }

    fn pose(&self, s: f64) -> ([f64; 2], f64) {
        let i = self.segments.partition_point(|seg| seg.2 <= s).saturating_sub(1);
        let (a, b, s0) = self.segments[i];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let f = ((s - s0) / len).clamp(0.0, 1.0);
        ([a[0] + f * dx, a[1] + f * dy], dy.atan2(dx))
    }
}

fn range(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] < r[1] {
        rng.gen_range(r[0]..=r[1])
    } else {
        r[0]
    }
}

/// Draws a maneuver, its speed and its future segments.
fn draw_maneuver(
    rng: &mut ChaCha8Rng,
    mix: &WeightedIndex<f64>,
    cfg: &GenConfig,
) -> (Maneuver, f64, Vec<Segment>) {
    let speed = range(rng, cfg.speed_range);
    match mix.sample(rng) {
        0 => (Maneuver::Straight, speed, vec![]),
        k @ (1 | 2) => {
            let onset = range(rng, TURN_ONSET_S);
            let tau = range(rng, TURN_DURATION_S);
            let radius = 2.0 * speed * tau / PI;
            let (m, sweep) = if k == 1 {
                (Maneuver::LeftTurn, FRAC_PI_2)
            } else {
                (Maneuver::RightTurn, -FRAC_PI_2)
            };
            (m, speed, vec![Segment::Line(speed * onset), Segment::Arc { radius, sweep }])
        }
        3 => {
            let lo = cfg.speed_range[0].max(U_TURN_SPEED[0]);
            let hi = cfg.speed_range[1].min(U_TURN_SPEED[1]);
            let speed = if lo <= hi {
                range(rng, [lo, hi])
            } else {
                speed.clamp(U_TURN_SPEED[0], U_TURN_SPEED[1])
            };
            let onset = range(rng, U_TURN_ONSET_S);
            let radius = range(rng, U_TURN_RADIUS);
            let sweep = PI - range(rng, U_TURN_SHORTFALL_RAD);
            let (m, sweep) = if rng.gen_bool(0.5) {
                (Maneuver::LeftUTurn, sweep)
            } else {
                (Maneuver::RightUTurn, -sweep)
            };
            (m, speed, vec![Segment::Line(speed * onset), Segment::Arc { radius, sweep }])
        }
        _ => (Maneuver::Stationary, 0.0, vec![]),
    }
}

/// `round(density · lane length / 100)` vehicles, valid over the whole
/// duration, each paired with its maneuver.
pub fn generate_agents(
    map: &[MapPolyline],
    rng: &mut ChaCha8Rng,
    cfg: &GenConfig,
) -> Result<Vec<(AgentTrack, Maneuver)>, GenError> {
    let spawner = Spawner::new(map);
    if spawner.segments.is_empty() || spawner.total <= 0.0 {
        return Err(GenError::NoLanes);
    }
    let mix = WeightedIndex::new(cfg.maneuver_mix.weights())
        .map_err(|e| GenError::Config(format!("maneuver_mix: {e}")))?;
    let count = (cfg.density * spawner.total / 100.0).round() as usize;
    let n_steps = cfg.num_steps();
    let t_ref = cfg.reference_index() as f64;

    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (start, heading) = spawner.pose(rng.gen_range(0.0..spawner.total));
        let (maneuver, speed, segments) = draw_maneuver(rng, &mix, cfg);
        let path = Path { start, heading, segments };
        let states = (0..n_steps)
            .map(|k| {
                let (p, h) = path.pose(speed * (k as f64 - t_ref) * DT);
                AgentState {
                    x: p[0],
                    y: p[1],
                    vx: speed * h.cos(),
                    vy: speed * h.sin(),
                    heading: wrap_finite(h),
                }
            })
            .collect();
        out.push((
            AgentTrack {
                id: format!("veh-{i:03}"),
                agent_type: AgentType::Vehicle,
                states,
                valid: vec![true; n_steps],
                size: Some(VEHICLE_SIZE),
            },
            maneuver,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syngen::{generate_labeled, generate_map, scenario_rng, BlockType, ManeuverMix};

    fn only(mix: ManeuverMix) -> GenConfig {
        GenConfig {
            maneuver_mix: mix,
            ..Default::default()
        }
    }

    fn zero_mix() -> ManeuverMix {
        ManeuverMix {
            straight: 0.0,
            left_turn: 0.0,
            right_turn: 0.0,
            u_turn: 0.0,
            stationary: 0.0,
        }
    }

    #[test]
    fn count_follows_density() {
        let map = vec![
            MapPolyline {
                id: "a".into(),
                line_type: LineType::LaneCenter,
                points: vec![[0.0, 0.0], [200.0, 0.0]],
            },
            MapPolyline {
                id: "b".into(),
                line_type: LineType::LaneCenter,
                points: vec![[0.0, 5.0], [100.0, 5.0], [100.0, 105.0]],
            },
        ];
        let agents = generate_agents(&map, &mut scenario_rng(0, 0), &GenConfig::default()).unwrap();
        assert_eq!(agents.len(), 60);
    }

    #[test]
    fn no_lanes_is_an_error() {
        let r = generate_agents(&[], &mut scenario_rng(0, 0), &GenConfig::default());
        assert_eq!(r.unwrap_err(), GenError::NoLanes);
    }

    #[test]
    fn stationary_tracks_do_not_move() {
        let cfg = only(ManeuverMix { stationary: 1.0, ..zero_mix() });
        let (s, m) = generate_labeled(1, 2, &cfg).unwrap();
        assert!(m.iter().all(|&m| m == Maneuver::Stationary));
        for t in &s.tracks {
            assert!(t.states.iter().all(|st| st.x == t.states[0].x && st.y == t.states[0].y));
        }
    }

    #[test]
    fn paths_are_continuous_with_unit_speed_steps() {
        let cfg = GenConfig::default();
        let map = generate_map(&mut scenario_rng(4, 0), &cfg);
        let agents = generate_agents(&map, &mut scenario_rng(4, 1), &cfg).unwrap();
        for (track, _) in &agents {
            let v = track.states[0].speed();
            for w in track.states.windows(2) {
                let d = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
                // Chords of arcs are slightly shorter than the travelled arc.
                assert!(d <= v * DT + 1e-9 && d >= v * DT * 0.99, "{d} vs {}", v * DT);
            }
        }
    }

    #[test]
    fn same_seed_same_tracks() {
        let cfg = GenConfig {
            block_types: vec![BlockType::Curve],
            ..Default::default()
        };
        let a = generate_labeled(5, 5, &cfg).unwrap();
        let b = generate_labeled(5, 5, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
