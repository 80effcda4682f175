//! Eight-class maneuver taxonomy over agent-frame futures (x forward, y left).

use std::f64::consts::FRAC_PI_6;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::StratifyError;
use crate::scenario::wrap_finite;

pub const STATIONARY_MAX_SPEED: f64 = 2.0;
pub const STATIONARY_MAX_DISPLACEMENT: f64 = 5.0;
pub const STRAIGHT_MAX_HEADING_DELTA: f64 = FRAC_PI_6;
pub const STRAIGHT_MAX_LATERAL: f64 = 5.0;
pub const U_TURN_MAX_LONGITUDINAL: f64 = -5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryType {
    Stationary,
    Straight,
    StraightLeft,
    StraightRight,
    LeftTurn,
    RightTurn,
    LeftUTurn,
    RightUTurn,
}

impl TrajectoryType {
    pub const ALL: [TrajectoryType; 8] = [
        TrajectoryType::Stationary,
        TrajectoryType::Straight,
        TrajectoryType::StraightLeft,
        TrajectoryType::StraightRight,
        TrajectoryType::LeftTurn,
        TrajectoryType::RightTurn,
        TrajectoryType::LeftUTurn,
        TrajectoryType::RightUTurn,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryType::Stationary => "stationary",
            TrajectoryType::Straight => "straight",
            TrajectoryType::StraightLeft => "straight_left",
            TrajectoryType::StraightRight => "straight_right",
            TrajectoryType::LeftTurn => "left_turn",
            TrajectoryType::RightTurn => "right_turn",
            TrajectoryType::LeftUTurn => "left_u_turn",
            TrajectoryType::RightUTurn => "right_u_turn",
        }
    }
}

impl fmt::Display for TrajectoryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labels a future trajectory.
///
/// `headings` and `speeds` are per future step; `ref_heading` is the heading
/// at the reference step (0 in the focal frame). Only valid steps count.
pub fn classify_trajectory(
    positions: &[[f64; 2]],
    mask: &[bool],
    headings: &[f64],
    speeds: &[f64],
    ref_heading: f64,
) -> Result<TrajectoryType, StratifyError> {
    let last = mask
        .iter()
        .rposition(|&m| m)
        .ok_or(StratifyError::EmptyFuture)?;
    let [xe, ye] = positions[last];
    let max_speed = speeds
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .fold(0.0, f64::max);
    let dpsi = wrap_finite(headings[last] - ref_heading);

    let label = if max_speed < STATIONARY_MAX_SPEED && xe.hypot(ye) < STATIONARY_MAX_DISPLACEMENT {
        TrajectoryType::Stationary
    } else if dpsi.abs() < STRAIGHT_MAX_HEADING_DELTA {
        if ye.abs() < STRAIGHT_MAX_LATERAL {
            TrajectoryType::Straight
        } else if ye > 0.0 {
            TrajectoryType::StraightLeft
        } else {
            TrajectoryType::StraightRight
        }
    } else if dpsi > 0.0 {
        if xe < U_TURN_MAX_LONGITUDINAL {
            TrajectoryType::LeftUTurn
        } else {
            TrajectoryType::LeftTurn
        }
    } else if xe < U_TURN_MAX_LONGITUDINAL {
        TrajectoryType::RightUTurn
    } else {
        TrajectoryType::RightTurn
    };
    Ok(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn one(e: [f64; 2], dpsi: f64, speed: f64) -> TrajectoryType {
        classify_trajectory(&[e], &[true], &[dpsi], &[speed], 0.0).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(one([40.0, 0.5], 0.0, 6.7), TrajectoryType::Straight);
        assert_eq!(one([10.0, 12.0], FRAC_PI_2, 6.0), TrajectoryType::LeftTurn);
        assert_eq!(one([-8.0, 6.0], 2.9, 4.0), TrajectoryType::LeftUTurn);
        assert_eq!(one([1.0, 0.0], 0.0, 0.3), TrajectoryType::Stationary);
        assert_eq!(one([30.0, 7.0], 0.1, 6.0), TrajectoryType::StraightLeft);
        assert_eq!(one([30.0, -5.0], -0.1, 6.0), TrajectoryType::StraightRight);
        assert_eq!(one([10.0, -12.0], -FRAC_PI_2, 6.0), TrajectoryType::RightTurn);
        assert_eq!(one([-8.0, -6.0], -2.9, 5.0), TrajectoryType::RightUTurn);
    }

    #[test]
    fn heading_threshold_boundary_goes_to_turn() {
        assert_eq!(one([20.0, 3.0], FRAC_PI_6, 6.0), TrajectoryType::LeftTurn);
        assert_eq!(one([20.0, -3.0], -FRAC_PI_6, 6.0), TrajectoryType::RightTurn);
    }

    #[test]
    fn uses_last_valid_step() {
        let pos = [[10.0, 12.0], [99.0, 0.0]];
        let label =
            classify_trajectory(&pos, &[true, false], &[FRAC_PI_2, 0.0], &[6.0, 6.0], 0.0).unwrap();
        assert_eq!(label, TrajectoryType::LeftTurn);
        assert_eq!(
            classify_trajectory(&pos, &[false, false], &[0.0; 2], &[0.0; 2], 0.0),
            Err(StratifyError::EmptyFuture)
        );
    }

    #[test]
    fn fast_but_short_is_not_stationary() {
        assert_eq!(one([1.0, 0.0], 0.0, 2.5), TrajectoryType::Straight);
    }

    proptest! {
        #[test]
        fn every_input_gets_exactly_one_label(
            x in -100.0f64..100.0, y in -100.0f64..100.0,
            h in -10.0f64..10.0, v in 0.0f64..30.0,
        ) {
            let label = one([x, y], h, v);
            let hits = TrajectoryType::ALL.iter().filter(|&&t| t == label).count();
            prop_assert_eq!(hits, 1);
        }
    }
}
