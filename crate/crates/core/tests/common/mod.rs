#![allow(dead_code)]

use trajhub::preprocess::build_sample;
use trajhub::syngen::{generate_all, GenConfig};
use trajhub::{PreprocConfig, Scenario, UnifiedSample};

pub fn scenarios(n: usize, seed: u64) -> Vec<Scenario> {
    generate_all(&GenConfig {
        n_scenarios: n,
        seed,
        density: 6.0,
        ..GenConfig::default()
    })
    .unwrap()
}

/// One sample per focal agent, in scenario then agent-id order.
pub fn samples_of(scenarios: &[Scenario], cfg: &PreprocConfig) -> Vec<UnifiedSample> {
    let mut out = Vec::new();
    for s in scenarios {
        let mut focal = s.focal_agents.clone();
        focal.sort();
        for id in focal {
            out.push(build_sample(s, &id, s.current_index, cfg).unwrap());
        }
    }
    out
}

pub fn samples(n: usize, seed: u64) -> Vec<UnifiedSample> {
    samples_of(&scenarios(n, seed), &PreprocConfig::default())
}

/// Applies `p ↦ R(theta) p + t` to every global quantity of `s`.
pub fn rigid(s: &Scenario, theta: f64, t: [f64; 2]) -> Scenario {
    let (sn, c) = theta.sin_cos();
    let rot = |v: [f64; 2]| [c * v[0] - sn * v[1], sn * v[0] + c * v[1]];
    let mut out = s.clone();
    for track in &mut out.tracks {
        for (st, &valid) in track.states.iter_mut().zip(&track.valid) {
            if !valid {
                continue;
            }
            let p = rot([st.x, st.y]);
            let v = rot([st.vx, st.vy]);
            st.x = p[0] + t[0];
            st.y = p[1] + t[1];
            st.vx = v[0];
            st.vy = v[1];
            st.heading = trajhub::wrap_angle(st.heading + theta).unwrap();
        }
    }
    for line in &mut out.map {
        for p in &mut line.points {
            let q = rot(*p);
            *p = [q[0] + t[0], q[1] + t[1]];
        }
    }
    out
}
