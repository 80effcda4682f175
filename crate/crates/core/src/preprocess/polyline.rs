//! Arc-length resampling and range clipping of map polylines.

use crate::scenario::MapPolyline;

use super::PreprocessError;

/// Shortest polyline that can be resampled, in meters.
pub const MIN_POLYLINE_LENGTH: f64 = 1e-6;
const STATION_TOL: f64 = 1e-9;

/// Polyline sampled at uniform arc-length stations.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledPolyline {
    pub points: Vec<[f64; 2]>,
    /// Unit tangent of the source segment each point lies on.
    pub directions: Vec<[f64; 2]>,
    /// Arc-length position of each point along the source polyline.
    pub stations: Vec<f64>,
}

impl ResampledPolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn seg_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

pub fn polyline_length(points: &[[f64; 2]]) -> f64 {
    points.windows(2).map(|w| seg_len(w[0], w[1])).sum()
}

/// Resamples `points` at arc lengths `0, s, 2s, …` and always keeps the final
/// endpoint, so interior station gaps equal `spacing` and the last gap lies in
/// `(0, spacing]`.
///
/// A point sitting exactly on a vertex takes the direction of the outgoing
/// segment; the final point reuses the last segment's direction.
pub fn resample_polyline(
    points: &[[f64; 2]],
    spacing: f64,
) -> Result<ResampledPolyline, PreprocessError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(PreprocessError::InvalidSpacing(spacing));
    }
    if points.len() < 2 {
        return Err(PreprocessError::DegeneratePolyline { length: 0.0 });
    }
    let mut cum = Vec::with_capacity(points.len());
    cum.push(0.0);
    for w in points.windows(2) {
        cum.push(cum[cum.len() - 1] + seg_len(w[0], w[1]));
    }
    let total = cum[cum.len() - 1];
    if !(total >= MIN_POLYLINE_LENGTH) {
        return Err(PreprocessError::DegeneratePolyline { length: total });
    }

    let unit = |j: usize| {
        let (a, b) = (points[j], points[j + 1]);
        let d = seg_len(a, b);
        [(b[0] - a[0]) / d, (b[1] - a[1]) / d]
    };
    let last_seg = (0..points.len() - 1)
        .rev()
        .find(|&j| cum[j + 1] > cum[j])
        .expect("positive length implies a non-empty segment");

    let n_interior = ((total - STATION_TOL) / spacing).floor() as usize + 1;
    let mut out = ResampledPolyline {
        points: Vec::with_capacity(n_interior + 1),
        directions: Vec::with_capacity(n_interior + 1),
        stations: Vec::with_capacity(n_interior + 1),
    };
    let mut j = 0;
    for k in 0..n_interior {
        let s = k as f64 * spacing;
        if s >= total - STATION_TOL {
            break;
        }
        while j < last_seg && (cum[j + 1] <= s || cum[j + 1] == cum[j]) {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let u = ((s - cum[j]) / seg).clamp(0.0, 1.0);
        let (a, b) = (points[j], points[j + 1]);
        out.points.push([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
        out.directions.push(unit(j));
        out.stations.push(s);
    }
    out.points.push(points[points.len() - 1]);
    out.directions.push(unit(last_seg));
    out.stations.push(total);
    Ok(out)
}

fn inside(p: [f64; 2], r2: f64) -> bool {
    p[0] * p[0] + p[1] * p[1] <= r2
}

/// Parameters `t ∈ [0, 1]` where segment `a → b` meets the circle of radius `r`.
fn circle_hits(a: [f64; 2], b: [f64; 2], r: f64) -> Vec<f64> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
    let qc = a[0] * a[0] + a[1] * a[1] - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 || disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Numerically stable root pair.
    let q = -0.5 * (qb + qb.signum() * sq);
    let (mut t1, mut t2) = if q != 0.0 { (q / qa, qc / q) } else { (0.0, 0.0) };
    if t1 > t2 {
        std::mem::swap(&mut t1, &mut t2);
    }
    [t1, t2]
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .collect()
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn push_dedup(run: &mut Vec<[f64; 2]>, p: [f64; 2]) {
    if run.last().is_none_or(|&q| seg_len(q, p) > MIN_POLYLINE_LENGTH) {
        run.push(p);
    }
}

/// Keeps polylines with at least one vertex within `range_m` of the origin,
/// clipped to their inside portions plus one boundary point per crossing.
///
/// A polyline that leaves and re-enters the disc is split into one piece per
/// inside run; pieces keep the source id and the input order.
pub fn filter_map(map: &[MapPolyline], range_m: f64) -> Vec<MapPolyline> {
    let r2 = range_m * range_m;
    let mut out = Vec::new();
    for line in map {
        if !line.points.iter().any(|&p| inside(p, r2)) {
            continue;
        }
        if line.points.iter().all(|&p| inside(p, r2)) {
            out.push(line.clone());
            continue;
        }
        let mut runs: Vec<Vec<[f64; 2]>> = Vec::new();
        let mut run: Vec<[f64; 2]> = Vec::new();
        if inside(line.points[0], r2) {
            run.push(line.points[0]);
        }
        for w in line.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            match (inside(a, r2), inside(b, r2)) {
                (true, true) => push_dedup(&mut run, b),
                (true, false) => {
                    let hits = circle_hits(a, b, range_m);
                    let t = hits.last().copied().unwrap_or(0.0);
                    push_dedup(&mut run, lerp(a, b, t));
                    runs.push(std::mem::take(&mut run));
                }
                (false, true) => {
                    let hits = circle_hits(a, b, range_m);
                    let t = hits.first().copied().unwrap_or(1.0);
                    run = vec![lerp(a, b, t)];
                    push_dedup(&mut run, b);
                }
                (false, false) => {
                    let hits = circle_hits(a, b, range_m);
                    if hits.len() == 2 {
                        let mut chord = vec![lerp(a, b, hits[0])];
                        push_dedup(&mut chord, lerp(a, b, hits[1]));
                        runs.push(chord);
                    }
                }
            }
        }
        if !run.is_empty() {
            runs.push(run);
        }
        let min = line.line_type.min_points();
        for points in runs.into_iter().filter(|r| r.len() >= min) {
            out.push(MapPolyline {
                id: line.id.clone(),
                line_type: line.line_type,
                points,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::LineType;

    fn lane(points: Vec<[f64; 2]>) -> MapPolyline {
        MapPolyline { id: "l".into(), line_type: LineType::LaneCenter, points }
    }

    #[test]
    fn collinear_half_meter() {
        let r = resample_polyline(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 0.5).unwrap();
        let xs: Vec<f64> = r.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(r.directions.iter().all(|d| *d == [1.0, 0.0]));
    }

    #[test]
    fn short_final_gap() {
        let r = resample_polyline(&[[0.0, 0.0], [1.2, 0.0]], 0.5).unwrap();
        assert_eq!(r.stations.len(), 4);
        for (got, want) in r.stations.iter().zip([0.0, 0.5, 1.0, 1.2]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((r.points[3][0] - r.points[2][0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn right_angle_direction_flip() {
        let r = resample_polyline(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], 0.5).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r.directions[0], [1.0, 0.0]);
        assert_eq!(r.directions[1], [1.0, 0.0]);
        assert_eq!(r.points[2], [1.0, 0.0]);
        assert_eq!(r.directions[2], [0.0, 1.0]);
        assert_eq!(r.directions[3], [0.0, 1.0]);
        assert_eq!(r.directions[4], [0.0, 1.0]);
        assert_eq!(r.points[3], [1.0, 0.5]);
    }

    #[test]
    fn degenerate_polyline_is_rejected() {
        assert!(matches!(
            resample_polyline(&[[1.0, 1.0], [1.0, 1.0 + 1e-8]], 0.5),
            Err(PreprocessError::DegeneratePolyline { .. })
        ));
        assert!(resample_polyline(&[[1.0, 1.0]], 0.5).is_err());
    }

    #[test]
    fn exact_multiple_keeps_full_last_gap() {
        let r = resample_polyline(&[[0.0, 0.0], [0.0, 2.0]], 0.5).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r.stations[4], 2.0);
    }

    #[test]
    fn map_inside_kept_outside_dropped() {
        let map = vec![
            lane(vec![[0.0, 0.0], [50.0, 0.0]]),
            lane(vec![[200.0, 0.0], [300.0, 0.0]]),
        ];
        let f = filter_map(&map, 100.0);
        assert_eq!(f, vec![map[0].clone()]);
    }

    #[test]
    fn crossing_lane_truncated_at_boundary() {
        // 400 m lane from x = -150 to 250; it is inside between arc lengths 50 and 250.
        let pts: Vec<[f64; 2]> = (0..=40).map(|i| [-150.0 + 10.0 * i as f64, 0.0]).collect();
        let f = filter_map(&[lane(pts)], 100.0);
        assert_eq!(f.len(), 1);
        let p = &f[0].points;
        assert!((p[0][0] + 100.0).abs() < 1e-9);
        assert!((p[p.len() - 1][0] - 100.0).abs() < 1e-9);
        assert_eq!(p.len(), 21);
    }

    #[test]
    fn reentering_lane_is_split() {
        // U-shaped lane: in, out past the ring, back in.
        let map = vec![lane(vec![[0.0, 0.0], [150.0, 0.0], [150.0, 20.0], [0.0, 20.0]])];
        let f = filter_map(&map, 100.0);
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|l| l.points.iter().all(|p| p[0].hypot(p[1]) <= 100.0 + 1e-9)));
    }
}
