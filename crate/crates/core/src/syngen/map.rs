//! Road blocks chained from a moving cursor pose.
//!
//! Each block has a reference axis; it emits two opposite lane centers at
//! half a lane width either side, road edges at one lane width and a center
//! road line. This block grammar is a minimal stand-in for a rule-based map
//! generator.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GenConfig;
use crate::scenario::{wrap_finite, LineType, MapPolyline};

/// Largest heading change between consecutive points on an arc.
const ARC_STEP_RAD: f64 = 5.0 * std::f64::consts::PI / 180.0;
const STRAIGHT_LEN: [f64; 2] = [25.0, 40.0];
const CURVE_RADIUS: [f64; 2] = [15.0, 25.0];
const BRANCH_LEN: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockType {
    Straight,
    Curve,
    TIntersection,
}

impl BlockType {
    pub const ALL: [BlockType; 3] = [BlockType::Straight, BlockType::Curve, BlockType::TIntersection];
}

#[derive(Debug, Clone, Copy)]
struct Pose {
    p: [f64; 2],
    h: f64,
}

impl Pose {
    fn advance(&self, d: f64) -> Pose {
        Pose {
            p: [self.p[0] + d * self.h.cos(), self.p[1] + d * self.h.sin()],
            h: self.h,
        }
    }

    /// Point `d` to the left of the pose.
    fn lateral(&self, d: f64) -> [f64; 2] {
        [self.p[0] - d * self.h.sin(), self.p[1] + d * self.h.cos()]
    }
}

fn straight_axis(start: Pose, len: f64) -> Vec<Pose> {
    vec![start, start.advance(len)]
}

/// Arc of `radius` turning by `sweep`, positive to the left.
fn arc_axis(start: Pose, radius: f64, sweep: f64) -> Vec<Pose> {
    let n = (sweep.abs() / ARC_STEP_RAD).ceil().max(1.0) as usize;
    let side = sweep.signum();
    let center = start.lateral(side * radius);
    (0..=n)
        .map(|i| {
            let dh = sweep * i as f64 / n as f64;
            let h = start.h + dh;
            // Position is the center minus the left-normal times the signed radius.
            let p = [
                center[0] + side * radius * h.sin(),
                center[1] - side * radius * h.cos(),
            ];
            Pose { p, h: wrap_finite(h) }
        })
        .collect()
}

fn offset(axis: &[Pose], d: f64) -> Vec<[f64; 2]> {
    axis.iter().map(|q| q.lateral(d)).collect()
}

fn emit_road(out: &mut Vec<MapPolyline>, prefix: &str, axis: &[Pose], w: f64) {
    let mut push = |suffix: &str, line_type: LineType, points: Vec<[f64; 2]>| {
        out.push(MapPolyline {
            id: format!("{prefix}-{suffix}"),
            line_type,
            points,
        });
    };
    push("lane-fwd", LineType::LaneCenter, offset(axis, -w / 2.0));
    let mut rev = offset(axis, w / 2.0);
    rev.reverse();
    push("lane-rev", LineType::LaneCenter, rev);
    push("edge-right", LineType::RoadEdge, offset(axis, -w));
    push("edge-left", LineType::RoadEdge, offset(axis, w));
    push("center-line", LineType::RoadLine, offset(axis, 0.0));
}

/// `cfg.n_blocks` blocks chained from the origin heading along +x.
pub fn generate_map(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Vec<MapPolyline> {
    let w = cfg.lane_width;
    let mut cursor = Pose { p: [0.0, 0.0], h: 0.0 };
    let mut out = Vec::new();
    for b in 0..cfg.n_blocks {
        let kind = cfg.block_types[rng.gen_range(0..cfg.block_types.len())];
        let prefix = format!("b{b}");
        let axis = match kind {
            BlockType::Straight => straight_axis(cursor, rng.gen_range(STRAIGHT_LEN[0]..=STRAIGHT_LEN[1])),
            BlockType::Curve => {
                let min_r = CURVE_RADIUS[0].max(2.0 * w + 5.0);
                let radius = rng.gen_range(min_r..=CURVE_RADIUS[1].max(min_r));
                let sweep = if rng.gen_bool(0.5) { FRAC_PI_2 } else { -FRAC_PI_2 };
                arc_axis(cursor, radius, sweep)
            }
            BlockType::TIntersection => {
                let len = rng.gen_range(STRAIGHT_LEN[0]..=STRAIGHT_LEN[1]);
                let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let mid = cursor.advance(len / 2.0);
                let mouth = Pose {
                    p: mid.lateral(side * w),
                    h: wrap_finite(mid.h + side * FRAC_PI_2),
                };
                emit_road(&mut out, &format!("{prefix}-branch"), &straight_axis(mouth, BRANCH_LEN), w);
                let cross = mouth.advance(2.0);
                out.push(MapPolyline {
                    id: format!("{prefix}-crosswalk"),
                    line_type: LineType::Crosswalk,
                    points: vec![cross.lateral(-w), cross.lateral(w)],
                });
                straight_axis(cursor, len)
            }
        };
        emit_road(&mut out, &prefix, &axis, w);
        cursor = *axis.last().expect("axis has points");
    }
    out
}
