//! Browser bindings for the static demo in `www/`.
//!
//! Every export returns a JSON string; failures come back as `{"error": …}`
//! so the functions behave the same natively and under wasm.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use trajhub::baselines::{predict, Baseline};
use trajhub::metrics::{score_sample, MetricsConfig};
use trajhub::preprocess::features::map_ch;
use trajhub::preprocess::{build_sample, resample_polyline};
use trajhub::stratify::{label_sample, profile_samples, DifficultyBins, KalmanParams};
use trajhub::syngen::{generate_labeled, GenConfig, ManeuverMix};
use trajhub::{LineType, PreprocConfig, UnifiedSample};

/// Scenario cap for one profile request; keeps the page responsive.
pub const MAX_PROFILE_SCENARIOS: u32 = 200;

fn finish(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

/// Resamples a polyline given as `[[x, y], …]` at `spacing` meters.
#[wasm_bindgen]
pub fn resample(points_json: &str, spacing: f64) -> String {
    finish((|| {
        let pts: Vec<[f64; 2]> = serde_json::from_str(points_json).map_err(|e| e.to_string())?;
        let r = resample_polyline(&pts, spacing).map_err(|e| e.to_string())?;
        let gaps: Vec<f64> = r.stations.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(json!({
            "points": r.points,
            "directions": r.directions,
            "stations": r.stations,
            "gaps": gaps,
        }))
    })())
}

/// Map chunks of a sample as agent-frame point lists with their line type.
fn map_chunks(x: &UnifiedSample) -> Vec<Value> {
    (0..x.num_chunks)
        .filter_map(|l| {
            let rows: Vec<&[f64]> = (0..x.points_per_chunk)
                .filter(|&p| x.map_mask[l * x.points_per_chunk + p])
                .map(|p| x.map_row(l, p))
                .collect();
            let first = rows.first()?;
            let kind = LineType::ALL
                .iter()
                .find(|t| first[map_ch::TYPE + t.index()] == 1.0)
                .map_or("unknown", |t| t.as_str());
            let pts: Vec<[f64; 2]> = rows.iter().map(|r| [r[map_ch::X], r[map_ch::Y]]).collect();
            Some(json!({ "type": kind, "points": pts }))
        })
        .collect()
}

fn neighbors(x: &UnifiedSample) -> Vec<Vec<[f64; 2]>> {
    (0..x.num_neighbors())
        .map(|n| {
            (0..x.past_len)
                .filter(|&t| x.neighbor_mask[n * x.past_len + t])
                .map(|t| {
                    let r = x.neighbor_row(n, t);
                    [r[0], r[1]]
                })
                .collect()
        })
        .collect()
}

/// Builds one synthetic scene and scores both baselines on its `agent`-th
/// focal agent (wrapping around the focal list).
#[wasm_bindgen]
pub fn scene(seed: u32, index: u32, density: f64, agent: u32, modes: u32) -> String {
    finish((|| {
        let gen = GenConfig {
            density,
            ..GenConfig::default()
        };
        gen.validate().map_err(|e| e.to_string())?;
        let (s, maneuvers) = generate_labeled(seed as u64, index as u64, &gen).map_err(|e| e.to_string())?;
        if s.focal_agents.is_empty() {
            return Err("scene has no focal agent".into());
        }
        let i = agent as usize % s.focal_agents.len();
        let id = &s.focal_agents[i];
        let cfg = PreprocConfig::default();
        let x = build_sample(&s, id, s.current_index, &cfg).map_err(|e| e.to_string())?;
        let params = KalmanParams::default();
        let bins = DifficultyBins::paper_main();
        let label = label_sample(&x, &params, &bins).map_err(|e| e.to_string())?;

        let k = (modes as usize).clamp(1, 6);
        let mut preds = serde_json::Map::new();
        for (name, model) in [("cv", Baseline::ConstantVelocity), ("kalman", Baseline::Kalman)] {
            let rec = predict(model, &x, k, &params).map_err(|e| e.to_string())?;
            let m = score_sample(
                &x.sample_key,
                &rec.trajectories,
                &rec.probabilities,
                &x.gt_future,
                &x.gt_mask,
                &MetricsConfig::default(),
            )
            .map_err(|e| e.to_string())?;
            preds.insert(
                name.into(),
                json!({
                    "trajectories": rec.trajectories,
                    "probabilities": rec.probabilities,
                    "min_ade": m.min_ade,
                    "min_fde": m.min_fde,
                    "miss": m.miss,
                    "brier_min_fde": m.brier_min_fde,
                }),
            );
        }
        let gt: Vec<[f64; 2]> = x
            .gt_future
            .iter()
            .zip(&x.gt_mask)
            .filter(|(_, &m)| m)
            .map(|(p, _)| *p)
            .collect();
        Ok(json!({
            "scenario": s.id,
            "agent": id,
            "focal_count": s.focal_agents.len(),
            "maneuver": s.tracks.iter().position(|t| &t.id == id).map(|j| format!("{:?}", maneuvers[j])),
            "trajectory_type": label.traj_type.as_str(),
            "kalman_difficulty": label.kalman_difficulty,
            "difficulty_bin": label.kalman_difficulty.map(|d| bins.label(d).to_string()),
            "history": x.history_xy,
            "future": gt,
            "neighbors": neighbors(&x),
            "map": map_chunks(&x),
            "predictions": preds,
        }))
    })())
}

/// Generates `n` scenarios with the given maneuver weights and profiles
/// their samples under the `bins` preset.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn profile(
    seed: u32,
    n: u32,
    straight: f64,
    left_turn: f64,
    right_turn: f64,
    u_turn: f64,
    stationary: f64,
    bins: &str,
) -> String {
    finish((|| {
        if n == 0 || n > MAX_PROFILE_SCENARIOS {
            return Err(format!("scenario count must be in 1..={MAX_PROFILE_SCENARIOS}"));
        }
        let bins: DifficultyBins = bins.parse().map_err(|e: trajhub::stratify::StratifyError| e.to_string())?;
        let gen = GenConfig {
            seed: seed as u64,
            n_scenarios: n as usize,
            maneuver_mix: ManeuverMix {
                straight,
                left_turn,
                right_turn,
                u_turn,
                stationary,
            },
            ..GenConfig::default()
        };
        gen.validate().map_err(|e| e.to_string())?;
        let cfg = PreprocConfig::default();
        let mut samples = Vec::new();
        for i in 0..gen.n_scenarios {
            let (s, _) = generate_labeled(gen.seed, i as u64, &gen).map_err(|e| e.to_string())?;
            for id in &s.focal_agents {
                samples.push(build_sample(&s, id, s.current_index, &cfg).map_err(|e| e.to_string())?);
            }
        }
        let p = profile_samples(&samples, &KalmanParams::default(), &bins).map_err(|e| e.to_string())?;
        serde_json::to_value(p).map_err(|e| e.to_string())
    })())
}
