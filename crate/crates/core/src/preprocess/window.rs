use crate::scenario::{AgentState, AgentTrack};

use super::{PreprocConfig, PreprocessError};

/// History and future slices of one track around a reference step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackWindow {
    /// Steps `t_ref - T_p + 1 ..= t_ref`; zeroed where invalid.
    pub past: Vec<AgentState>,
    pub past_mask: Vec<bool>,
    /// Steps `t_ref + 1 ..= t_ref + T_f`.
    pub future: Vec<AgentState>,
    pub future_mask: Vec<bool>,
}

impl TrackWindow {
    pub fn future_positions(&self) -> Vec<[f64; 2]> {
        self.future.iter().map(AgentState::position).collect()
    }
}

pub fn window_track(
    track: &AgentTrack,
    t_ref: usize,
    cfg: &PreprocConfig,
) -> Result<TrackWindow, PreprocessError> {
    let t_p = cfg.past_len();
    let t_f = cfg.future_len();
    let n = track.states.len();
    if t_ref + 1 < t_p || t_ref + t_f >= n {
        return Err(PreprocessError::WindowOutOfRange {
            t_ref,
            past: t_p,
            future: t_f,
            steps: n,
        });
    }
    let slice = |range: std::ops::Range<usize>| {
        let states = range
            .clone()
            .map(|t| if track.valid[t] { track.states[t] } else { AgentState::default() })
            .collect();
        let mask = track.valid[range].to_vec();
        (states, mask)
    };
    let (past, past_mask) = slice(t_ref + 1 - t_p..t_ref + 1);
    let (future, future_mask) = slice(t_ref + 1..t_ref + 1 + t_f);
    Ok(TrackWindow {
        past,
        past_mask,
        future,
        future_mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tests::straight_track;

    #[test]
    fn default_window_sizes() {
        let track = straight_track("a", 81, 0.0, 10.0);
        let w = window_track(&track, 20, &PreprocConfig::default()).unwrap();
        assert_eq!(w.past.len(), 21);
        assert_eq!(w.future.len(), 60);
        assert_eq!(w.past[20], track.states[20]);
        assert_eq!(w.future[59], track.states[80]);
    }

    #[test]
    fn leading_invalid_steps_are_masked_and_zeroed() {
        let mut track = straight_track("a", 81, 1.0, 10.0);
        for t in 0..5 {
            track.valid[t] = false;
        }
        let w = window_track(&track, 20, &PreprocConfig::default()).unwrap();
        assert_eq!(&w.past_mask[..6], &[false, false, false, false, false, true]);
        assert!(w.past[..5].iter().all(|s| *s == AgentState::default()));
    }

    #[test]
    fn too_early_reference_is_out_of_range() {
        let track = straight_track("a", 81, 0.0, 10.0);
        let cfg = PreprocConfig::default();
        assert!(matches!(
            window_track(&track, 10, &cfg),
            Err(PreprocessError::WindowOutOfRange { .. })
        ));
        assert!(window_track(&track, 21, &cfg).is_err());
    }
}
