//! Clamped cubic splines over uniform knots, timed against joint limits.

use serde::{Deserialize, Serialize};

/// One joint's spline on `[0, 1]`: values and second derivatives at the knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JointSpline {
    y: Vec<f64>,
    m: Vec<f64>,
}

impl JointSpline {
    /// Clamped (zero end slope) interpolant through `y` on uniform knots.
    fn clamped(y: Vec<f64>) -> Self {
        let n = y.len() - 1;
        let h = 1.0 / n as f64;
        // Tridiagonal system for the knot second derivatives, Thomas algorithm.
        let mut diag = vec![4.0 * h; n + 1];
        diag[0] = 2.0 * h;
        diag[n] = 2.0 * h;
        let mut rhs = vec![0.0; n + 1];
        rhs[0] = 6.0 * (y[1] - y[0]) / h;
        rhs[n] = -6.0 * (y[n] - y[n - 1]) / h;
        for k in 1..n {
            rhs[k] = 6.0 * ((y[k + 1] - y[k]) - (y[k] - y[k - 1])) / h;
        }
        let off = h;
        for k in 1..=n {
            let w = off / diag[k - 1];
            diag[k] -= w * off;
            rhs[k] -= w * rhs[k - 1];
        }
        let mut m = vec![0.0; n + 1];
        m[n] = rhs[n] / diag[n];
        for k in (0..n).rev() {
            m[k] = (rhs[k] - off * m[k + 1]) / diag[k];
        }
        Self { y, m }
    }

    fn pieces(&self) -> usize {
        self.y.len() - 1
    }

    fn slope0(&self, k: usize, h: f64) -> f64 {
        (self.y[k + 1] - self.y[k]) / h - h * (2.0 * self.m[k] + self.m[k + 1]) / 6.0
    }

    /// Value and first two derivatives at `s` in `[0, 1]`.
    fn eval(&self, s: f64) -> (f64, f64, f64) {
        let n = self.pieces();
        let h = 1.0 / n as f64;
        let s = s.clamp(0.0, 1.0);
        let k = ((s / h).floor() as usize).min(n - 1);
        let u = s - k as f64 * h;
        let (m0, m1) = (self.m[k], self.m[k + 1]);
        let b = self.slope0(k, h);
        let c3 = (m1 - m0) / (6.0 * h);
        (
            self.y[k] + u * (b + u * (0.5 * m0 + u * c3)),
            b + u * (m0 + 3.0 * c3 * u),
            m0 + 6.0 * c3 * u,
        )
    }

    /// Exact maxima of |S'| and |S''| over `[0, 1]`.
    fn derivative_bounds(&self) -> (f64, f64) {
        let n = self.pieces();
        let h = 1.0 / n as f64;
        let acc = self.m.iter().fold(0.0f64, |a, m| a.max(m.abs()));
        let mut vel = 0.0f64;
        for k in 0..n {
            let (m0, m1) = (self.m[k], self.m[k + 1]);
            let b = self.slope0(k, h);
            let slope = |u: f64| b + m0 * u + (m1 - m0) / (2.0 * h) * u * u;
            vel = vel.max(slope(0.0).abs()).max(slope(h).abs());
            if m0 != m1 {
                let u = -m0 * h / (m1 - m0);
                if u > 0.0 && u < h {
                    vel = vel.max(slope(u).abs());
                }
            }
        }
        (vel, acc)
    }
}

/// Rest-to-rest spline through via points, uniformly stretched in time to the
/// shortest duration that respects the velocity and acceleration limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineMotion {
    joints: Vec<JointSpline>,
    duration: f64,
}

impl SplineMotion {
    /// `points` holds start, interior via points and end, each of joint dimension.
    pub fn through(points: &[Vec<f64>], v_max: &[f64], a_max: &[f64]) -> Self {
        assert!(points.len() >= 2, "spline needs two end points");
        let n_q = points[0].len();
        let joints: Vec<JointSpline> = (0..n_q)
            .map(|i| JointSpline::clamped(points.iter().map(|p| p[i]).collect()))
            .collect();
        let duration = joints
            .iter()
            .enumerate()
            .map(|(i, j)| {
                let (vel, acc) = j.derivative_bounds();
                (vel / v_max[i]).max((acc / a_max[i]).sqrt())
            })
            .fold(0.0, f64::max);
        Self { joints, duration }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.y[0]).collect()
    }

    pub fn end(&self) -> Vec<f64> {
        self.joints.iter().map(|j| *j.y.last().unwrap()).collect()
    }

    pub(crate) fn eval_into(&self, t: f64, q: &mut [f64], qd: &mut [f64], qdd: &mut [f64]) {
        let big_t = self.duration;
        if big_t == 0.0 {
            for (i, j) in self.joints.iter().enumerate() {
                q[i] = j.y[0];
                qd[i] = 0.0;
                qdd[i] = 0.0;
            }
            return;
        }
        for (i, j) in self.joints.iter().enumerate() {
            let (s, sd, sdd) = j.eval(t / big_t);
            q[i] = s;
            qd[i] = sd / big_t;
            qdd[i] = sdd / (big_t * big_t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_with_zero_end_slopes() {
        let s = JointSpline::clamped(vec![0.0, 1.0, -0.5, 2.0, 2.0]);
        for (k, y) in s.y.iter().enumerate() {
            let (v, _, _) = s.eval(k as f64 / 4.0);
            assert!((v - y).abs() < 1e-12);
        }
        assert!(s.eval(0.0).1.abs() < 1e-12);
        assert!(s.eval(1.0).1.abs() < 1e-12);
    }

    #[test]
    fn first_and_second_derivatives_are_continuous() {
        let s = JointSpline::clamped(vec![0.3, -1.0, 2.0, 0.0]);
        for k in 1..3 {
            let x = k as f64 / 3.0;
            let (_, d1a, d2a) = s.eval(x - 1e-10);
            let (_, d1b, d2b) = s.eval(x + 1e-10);
            assert!((d1a - d1b).abs() < 1e-7);
            assert!((d2a - d2b).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_bounds_match_dense_sampling() {
        let s = JointSpline::clamped(vec![0.0, 2.0, -1.0, 1.5, 3.0]);
        let (vel, acc) = s.derivative_bounds();
        let (mut v_hat, mut a_hat) = (0.0f64, 0.0f64);
        for k in 0..=100_000 {
            let (_, d1, d2) = s.eval(k as f64 / 100_000.0);
            v_hat = v_hat.max(d1.abs());
            a_hat = a_hat.max(d2.abs());
        }
        assert!(vel >= v_hat - 1e-12 && vel - v_hat < 1e-6);
        assert!(acc >= a_hat - 1e-12 && acc - a_hat < 1e-6);
    }

    #[test]
    fn timing_saturates_a_limit() {
        let pts = vec![vec![0.0, 0.0], vec![0.5, 1.0], vec![1.0, 3.0]];
        let m = SplineMotion::through(&pts, &[1.0, 2.0], &[1.5, 1.0]);
        let (mut q, mut qd, mut qdd) = ([0.0; 2], [0.0; 2], [0.0; 2]);
        let mut worst = 0.0f64;
        for k in 0..=20_000 {
            m.eval_into(m.duration() * k as f64 / 20_000.0, &mut q, &mut qd, &mut qdd);
            worst = worst
                .max(qd[0].abs() / 1.0)
                .max(qd[1].abs() / 2.0)
                .max(qdd[0].abs() / 1.5)
                .max(qdd[1].abs() / 1.0);
        }
        assert!(worst <= 1.0 + 1e-9 && worst > 0.999);
        m.eval_into(m.duration(), &mut q, &mut qd, &mut qdd);
        assert!((q[1] - 3.0).abs() < 1e-12);
    }
}
