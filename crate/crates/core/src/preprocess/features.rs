use crate::scenario::{AgentState, AgentType, LineType};
use crate::DT;

use super::{MaskedAttribute, PreprocConfig};

/// Per-step agent channels before the timestep one-hot:
/// `x, y, vx, vy, ax, ay, cos h, sin h` and a 4-way type one-hot.
pub const AGENT_BASE_CHANNELS: usize = 12;
/// Per-point map channels: `x, y, dx, dy` and a 7-way line-type one-hot.
pub const MAP_CHANNELS: usize = 11;

pub mod agent_ch {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const VX: usize = 2;
    pub const VY: usize = 3;
    pub const AX: usize = 4;
    pub const AY: usize = 5;
    pub const COS_H: usize = 6;
    pub const SIN_H: usize = 7;
    pub const TYPE: usize = 8;
    pub const TIMESTEP: usize = 12;
}

pub mod map_ch {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const DX: usize = 2;
    pub const DY: usize = 3;
    pub const TYPE: usize = 4;
}

/// Builds the `T_p × F_a` feature matrix (row-major) of an agent-frame history.
///
/// Acceleration is the backward difference of velocity over one step and is
/// zero at the first valid step and right after a gap. Rows with a false mask
/// are entirely zero.
pub fn agent_features(
    past: &[AgentState],
    mask: &[bool],
    agent_type: AgentType,
    cfg: &PreprocConfig,
) -> Vec<f64> {
    let t_p = past.len();
    let f_a = AGENT_BASE_CHANNELS + t_p;
    let mut out = vec![0.0; t_p * f_a];
    for (t, st) in past.iter().enumerate() {
        if !mask[t] {
            continue;
        }
        let row = &mut out[t * f_a..(t + 1) * f_a];
        let (ax, ay) = if t > 0 && mask[t - 1] {
            ((st.vx - past[t - 1].vx) / DT, (st.vy - past[t - 1].vy) / DT)
        } else {
            (0.0, 0.0)
        };
        if !cfg.is_masked(MaskedAttribute::Position) {
            row[agent_ch::X] = st.x;
            row[agent_ch::Y] = st.y;
        }
        if !cfg.is_masked(MaskedAttribute::Velocity) {
            row[agent_ch::VX] = st.vx;
            row[agent_ch::VY] = st.vy;
        }
        if !cfg.is_masked(MaskedAttribute::Acceleration) {
            row[agent_ch::AX] = ax;
            row[agent_ch::AY] = ay;
        }
        if !cfg.is_masked(MaskedAttribute::Heading) {
            let (s, c) = st.heading.sin_cos();
            row[agent_ch::COS_H] = c;
            row[agent_ch::SIN_H] = s;
        }
        if !cfg.is_masked(MaskedAttribute::AgentType) {
            row[agent_ch::TYPE + agent_type.index()] = 1.0;
        }
        if !cfg.is_masked(MaskedAttribute::Timestep) {
            row[agent_ch::TIMESTEP + t] = 1.0;
        }
    }
    out
}

/// Writes one map point into an `F_m`-wide row.
pub(crate) fn map_point_row(
    row: &mut [f64],
    p: [f64; 2],
    dir: [f64; 2],
    line_type: LineType,
    cfg: &PreprocConfig,
) {
    row[map_ch::X] = p[0];
    row[map_ch::Y] = p[1];
    if !cfg.is_masked(MaskedAttribute::MapDirection) {
        row[map_ch::DX] = dir[0];
        row[map_ch::DY] = dir[1];
    }
    row[map_ch::TYPE + line_type.index()] = 1.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still(n: usize) -> Vec<AgentState> {
        vec![AgentState::default(); n]
    }

    #[test]
    fn stationary_track_has_unit_heading_and_zero_motion() {
        let cfg = PreprocConfig::default();
        let f = agent_features(&still(21), &[true; 21], AgentType::Vehicle, &cfg);
        let f_a = 33;
        for t in 0..21 {
            let row = &f[t * f_a..(t + 1) * f_a];
            assert_eq!(&row[..6], &[0.0; 6]);
            assert_eq!(row[agent_ch::COS_H], 1.0);
            assert_eq!(row[agent_ch::SIN_H], 0.0);
            assert_eq!(&row[8..12], &[1.0, 0.0, 0.0, 0.0]);
            assert_eq!(row[agent_ch::TIMESTEP + t], 1.0);
            assert_eq!(row[12..].iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn acceleration_by_backward_difference() {
        let cfg = PreprocConfig::default();
        let mut past = still(21);
        for st in &mut past[10..] {
            st.vx = 1.0;
        }
        let f = agent_features(&past, &[true; 21], AgentType::Vehicle, &cfg);
        let ax = |t: usize| f[t * 33 + agent_ch::AX];
        assert_eq!(ax(0), 0.0);
        assert_eq!(ax(9), 0.0);
        assert!((ax(10) - 10.0).abs() < 1e-12);
        assert_eq!(ax(11), 0.0);
    }

    #[test]
    fn acceleration_is_zero_after_gap() {
        let cfg = PreprocConfig::default();
        let mut past = still(21);
        for (i, st) in past.iter_mut().enumerate() {
            st.vx = i as f64;
        }
        let mut mask = [true; 21];
        mask[5] = false;
        past[5] = AgentState::default();
        let f = agent_features(&past, &mask, AgentType::Cyclist, &cfg);
        assert!(f[5 * 33..6 * 33].iter().all(|&v| v == 0.0));
        assert_eq!(f[6 * 33 + agent_ch::AX], 0.0);
        assert!((f[7 * 33 + agent_ch::AX] - 10.0).abs() < 1e-9);
        assert_eq!(f[7 * 33 + agent_ch::TYPE + 2], 1.0);
    }

    #[test]
    fn masked_attributes_zero_channels() {
        let cfg = PreprocConfig {
            masked_attributes: vec![MaskedAttribute::Velocity, MaskedAttribute::Timestep],
            ..Default::default()
        };
        let mut past = still(21);
        past[3].vx = 4.0;
        let f = agent_features(&past, &[true; 21], AgentType::Vehicle, &cfg);
        assert_eq!(f[3 * 33 + agent_ch::VX], 0.0);
        assert_eq!(f[3 * 33 + agent_ch::TIMESTEP + 3], 0.0);
        assert_eq!(f[3 * 33 + agent_ch::COS_H], 1.0);
    }
}
