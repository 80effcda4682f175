//! Constant-velocity linear Kalman filter used to score sample difficulty.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use super::StratifyError;
use crate::DT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KalmanParams {
    pub dt: f64,
    /// White-acceleration noise standard deviation, m/s².
    pub accel_noise_std: f64,
    /// Position measurement noise standard deviation, m.
    pub meas_noise_std: f64,
    pub init_pos_var: f64,
    pub init_vel_var: f64,
}

impl Default for KalmanParams {
    fn default() -> Self {
        Self {
            dt: DT,
            accel_noise_std: 1.0,
            meas_noise_std: 0.1,
            init_pos_var: 1.0,
            init_vel_var: 10.0,
        }
    }
}

impl KalmanParams {
    pub fn validate(&self) -> Result<(), StratifyError> {
        let all = [
            self.dt,
            self.accel_noise_std,
            self.meas_noise_std,
            self.init_pos_var,
            self.init_vel_var,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(StratifyError::InvalidParams)
        }
    }
}

/// Filter extrapolation over the future horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanForecast {
    pub positions: Vec<[f64; 2]>,
    /// State covariance after the last forecast step, `[x, y, vx, vy]` order.
    pub terminal_covariance: Matrix4<f64>,
}

impl KalmanForecast {
    pub fn terminal_lateral_std(&self) -> f64 {
        self.terminal_covariance[(1, 1)].max(0.0).sqrt()
    }
}

struct Model {
    f: Matrix4<f64>,
    q: Matrix4<f64>,
    h: Matrix2x4<f64>,
    r: Matrix2<f64>,
}

impl Model {
    fn new(p: &KalmanParams) -> Self {
        let dt = p.dt;
        #[rustfmt::skip]
        let f = Matrix4::new(
            1.0, 0.0, dt, 0.0,
            0.0, 1.0, 0.0, dt,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        // Piecewise-constant white acceleration: G = [dt²/2, dt] per axis, Q = σ² G Gᵀ.
        let q2 = p.accel_noise_std * p.accel_noise_std;
        let (a, b, c) = (dt.powi(4) / 4.0 * q2, dt.powi(3) / 2.0 * q2, dt * dt * q2);
        #[rustfmt::skip]
        let q = Matrix4::new(
            a, 0.0, b, 0.0,
            0.0, a, 0.0, b,
            b, 0.0, c, 0.0,
            0.0, b, 0.0, c,
        );
        #[rustfmt::skip]
        let h = Matrix2x4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
        );
        let r = Matrix2::identity() * (p.meas_noise_std * p.meas_noise_std);
        Self { f, q, h, r }
    }

    fn predict(&self, x: &mut Vector4<f64>, p: &mut Matrix4<f64>) {
        *x = self.f * *x;
        *p = self.f * *p * self.f.transpose() + self.q;
    }

    fn update(&self, x: &mut Vector4<f64>, p: &mut Matrix4<f64>, z: Vector2<f64>) {
        let y = z - self.h * *x;
        let s = self.h * *p * self.h.transpose() + self.r;
        let Some(s_inv) = s.try_inverse() else {
            return;
        };
        let k: Matrix4x2<f64> = *p * self.h.transpose() * s_inv;
        *x += k * y;
        // Joseph form keeps the covariance symmetric positive semi-definite.
        let i_kh = Matrix4::identity() - k * self.h;
        *p = i_kh * *p * i_kh.transpose() + k * self.r * k.transpose();
    }
}

/// Fits a constant-velocity filter to the masked history and rolls it forward
/// `horizon` steps without further measurements.
///
/// The state starts at the first valid observation with the finite-difference
/// velocity to the next valid one; later valid steps are filtered, invalid
/// ones are predict-only.
pub fn kalman_fit_predict(
    past: &[[f64; 2]],
    mask: &[bool],
    horizon: usize,
    params: &KalmanParams,
) -> Result<KalmanForecast, StratifyError> {
    params.validate()?;
    let valid: Vec<usize> = (0..past.len()).filter(|&i| mask[i]).collect();
    if valid.len() < 2 {
        return Err(StratifyError::InsufficientHistory(valid.len()));
    }
    let (i0, i1) = (valid[0], valid[1]);
    let gap = (i1 - i0) as f64 * params.dt;
    let mut x = Vector4::new(
        past[i0][0],
        past[i0][1],
        (past[i1][0] - past[i0][0]) / gap,
        (past[i1][1] - past[i0][1]) / gap,
    );
    let mut p = Matrix4::from_diagonal(&Vector4::new(
        params.init_pos_var,
        params.init_pos_var,
        params.init_vel_var,
        params.init_vel_var,
    ));
    let model = Model::new(params);
    for t in i0 + 1..past.len() {
        model.predict(&mut x, &mut p);
        if mask[t] {
            model.update(&mut x, &mut p, Vector2::new(past[t][0], past[t][1]));
        }
    }
    let mut positions = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        model.predict(&mut x, &mut p);
        positions.push([x[0], x[1]]);
    }
    Ok(KalmanForecast {
        positions,
        terminal_covariance: p,
    })
}

/// Final displacement error between the ground truth and the filter forecast,
/// measured at the last valid future step.
pub fn kalman_difficulty(
    gt_future: &[[f64; 2]],
    gt_mask: &[bool],
    prediction: &[[f64; 2]],
) -> Result<f64, StratifyError> {
    let last = gt_mask
        .iter()
        .rposition(|&m| m)
        .ok_or(StratifyError::EmptyFuture)?;
    let (g, p) = (gt_future[last], prediction[last]);
    Ok((g[0] - p[0]).hypot(g[1] - p[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv_track(n: usize, v: [f64; 2], offset: usize) -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let t = (i as f64 - offset as f64) * DT;
                [v[0] * t, v[1] * t]
            })
            .collect()
    }

    #[test]
    fn noiseless_cv_is_extrapolated_exactly() {
        let past = cv_track(21, [10.0, 0.0], 20);
        let f = kalman_fit_predict(&past, &[true; 21], 60, &KalmanParams::default()).unwrap();
        assert!((f.positions[59][0] - 60.0).abs() < 1e-9);
        assert!(f.positions[59][1].abs() < 1e-12);
        let gt: Vec<_> = (1..=60).map(|k| [k as f64, 0.0]).collect();
        assert!(kalman_difficulty(&gt, &[true; 60], &f.positions).unwrap() < 1e-6);
    }

    #[test]
    fn stationary_stays_put() {
        let past = vec![[0.0, 0.0]; 21];
        let f = kalman_fit_predict(&past, &[true; 21], 60, &KalmanParams::default()).unwrap();
        assert!(f.positions.iter().all(|p| p[0] == 0.0 && p[1] == 0.0));
    }

    #[test]
    fn gaps_do_not_change_noiseless_cv_forecast() {
        let past = cv_track(21, [7.0, -2.0], 20);
        let full = kalman_fit_predict(&past, &[true; 21], 60, &KalmanParams::default()).unwrap();
        let mut mask = [true; 21];
        for m in mask.iter_mut().take(18).skip(3) {
            *m = false;
        }
        mask[0] = false;
        let gappy = kalman_fit_predict(&past, &mask, 60, &KalmanParams::default()).unwrap();
        for (a, b) in full.positions.iter().zip(&gappy.positions) {
            assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn single_observation_is_insufficient() {
        let mut mask = [false; 21];
        mask[20] = true;
        assert_eq!(
            kalman_fit_predict(&[[0.0; 2]; 21], &mask, 60, &KalmanParams::default()),
            Err(StratifyError::InsufficientHistory(1))
        );
    }

    #[test]
    fn difficulty_examples() {
        let mut gt = vec![[0.0, 0.0]; 60];
        let mut pred = vec![[0.0, 0.0]; 60];
        gt[59] = [60.0, 5.0];
        pred[59] = [60.0, 0.0];
        assert_eq!(kalman_difficulty(&gt, &[true; 60], &pred).unwrap(), 5.0);

        let mut mask = [true; 60];
        for m in &mut mask[50..] {
            *m = false;
        }
        gt[49] = [3.0, 4.0];
        assert_eq!(kalman_difficulty(&gt, &mask, &pred).unwrap(), 5.0);
        assert_eq!(
            kalman_difficulty(&gt, &[false; 60], &pred),
            Err(StratifyError::EmptyFuture)
        );
    }

    #[test]
    fn lateral_uncertainty_grows_with_horizon() {
        let past = cv_track(21, [10.0, 0.0], 20);
        let p = KalmanParams::default();
        let short = kalman_fit_predict(&past, &[true; 21], 10, &p).unwrap();
        let long = kalman_fit_predict(&past, &[true; 21], 60, &p).unwrap();
        assert!(long.terminal_lateral_std() > short.terminal_lateral_std());
        assert!(short.terminal_lateral_std() > 0.0);
    }
}
