use serde_json::Value;
use trajhub_browser::{profile, resample, scene};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn resample_reports_uniform_gaps() {
    let v = parse(resample("[[0,0],[3.2,0],[3.2,2]]", 0.5));
    let gaps = v["gaps"].as_array().unwrap();
    let n = gaps.len();
    for g in &gaps[..n - 1] {
        assert!((g.as_f64().unwrap() - 0.5).abs() < 1e-9);
    }
    let last = gaps[n - 1].as_f64().unwrap();
    assert!(last > 0.0 && last <= 0.5);
    let stations = v["stations"].as_array().unwrap();
    assert!((stations[n].as_f64().unwrap() - 5.2).abs() < 1e-9);
}

#[test]
fn bad_input_comes_back_as_error() {
    assert!(parse(resample("not json", 0.5))["error"].is_string());
    assert!(parse(resample("[[0,0],[1,0]]", -1.0))["error"].is_string());
    assert!(parse(profile(1, 0, 1.0, 0.0, 0.0, 0.0, 0.0, "decade"))["error"].is_string());
    assert!(parse(profile(1, 2, 1.0, 0.0, 0.0, 0.0, 0.0, "nope"))["error"].is_string());
}

#[test]
fn scene_scores_both_baselines() {
    let v = parse(scene(7, 0, 10.0, 0, 6));
    assert!(v.get("error").is_none(), "{v}");
    for model in ["cv", "kalman"] {
        let p = &v["predictions"][model];
        assert_eq!(p["trajectories"].as_array().unwrap().len(), 6);
        let sum: f64 = p["probabilities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(p["min_fde"].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(v["history"].as_array().unwrap().len(), 21);
    assert!(!v["map"].as_array().unwrap().is_empty());
    assert!(v["trajectory_type"].is_string());
    assert_eq!(scene(7, 0, 10.0, 0, 6), scene(7, 0, 10.0, 0, 6));
}

#[test]
fn straight_only_profile() {
    let v = parse(profile(3, 5, 1.0, 0.0, 0.0, 0.0, 0.0, "paper-main"));
    let types = v["trajectory_types"].as_array().unwrap();
    assert_eq!(types.len(), 8);
    let straight = types.iter().find(|t| t["label"] == "straight").unwrap();
    assert_eq!(straight["count"], v["sample_count"]);
}
