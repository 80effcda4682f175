use crate::scenario::{AgentState, MapPolyline, Scenario, TransformRecord};

use super::PreprocessError;

/// Transform that places `agent_id` at the origin facing +x at `t_ref`.
pub fn agent_transform(
    s: &Scenario,
    agent_id: &str,
    t_ref: usize,
) -> Result<TransformRecord, PreprocessError> {
    let track = s
        .track(agent_id)
        .ok_or_else(|| PreprocessError::UnknownAgent(agent_id.to_string()))?;
    if !track.is_valid_at(t_ref) {
        return Err(PreprocessError::InvalidReferenceStep {
            agent: agent_id.to_string(),
            step: t_ref,
        });
    }
    let st = track.states[t_ref];
    Ok(TransformRecord {
        translation: [st.x, st.y],
        rotation: st.heading,
    })
}

pub fn transform_state(tf: &TransformRecord, st: &AgentState) -> AgentState {
    let [x, y] = tf.apply_point([st.x, st.y]);
    let [vx, vy] = tf.apply_vector([st.vx, st.vy]);
    AgentState {
        x,
        y,
        vx,
        vy,
        heading: tf.apply_heading(st.heading),
    }
}

pub fn transform_polyline(tf: &TransformRecord, line: &MapPolyline) -> MapPolyline {
    MapPolyline {
        id: line.id.clone(),
        line_type: line.line_type,
        points: line.points.iter().map(|&p| tf.apply_point(p)).collect(),
    }
}

/// Re-expresses the whole scenario in the frame of `agent_id` at `t_ref`.
///
/// Invalid timesteps stay zeroed.
pub fn to_agent_frame(
    s: &Scenario,
    agent_id: &str,
    t_ref: usize,
) -> Result<(TransformRecord, Scenario), PreprocessError> {
    let tf = agent_transform(s, agent_id, t_ref)?;
    let mut out = s.clone();
    for track in &mut out.tracks {
        for (st, &valid) in track.states.iter_mut().zip(&track.valid) {
            if valid {
                *st = transform_state(&tf, st);
            }
        }
    }
    for line in &mut out.map {
        for p in &mut line.points {
            *p = tf.apply_point(*p);
        }
    }
    Ok((tf, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tests::sample_scenario;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_when_focal_at_origin() {
        let s = sample_scenario(81);
        let (tf, local) = to_agent_frame(&s, "a", 0).unwrap();
        assert_eq!(tf, TransformRecord::identity());
        assert_eq!(local, s);
    }

    #[test]
    fn rotated_focal_maps_points_and_velocities() {
        let mut s = sample_scenario(81);
        s.tracks[0].states[20] = AgentState { x: 10.0, y: 5.0, vx: 0.0, vy: 3.0, heading: FRAC_PI_2 };
        s.map[0].points = vec![[10.0, 6.0], [20.0, 6.0]];
        let (tf, local) = to_agent_frame(&s, "a", 20).unwrap();
        let p = local.map[0].points[0];
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
        let st = local.tracks[0].states[20];
        assert!(st.x.abs() < 1e-12 && st.y.abs() < 1e-12 && st.heading.abs() < 1e-12);
        assert!((st.vx - 3.0).abs() < 1e-12 && st.vy.abs() < 1e-12);
        let back = tf.invert_point([st.x, st.y]);
        assert!((back[0] - 10.0).abs() < 1e-9 && (back[1] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_reference_is_rejected() {
        let mut s = sample_scenario(81);
        s.tracks[0].valid[20] = false;
        assert!(matches!(
            to_agent_frame(&s, "a", 20),
            Err(PreprocessError::InvalidReferenceStep { .. })
        ));
    }
}
