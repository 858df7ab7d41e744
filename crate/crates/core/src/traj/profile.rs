//! Synchronized trapezoidal velocity profiles.

use serde::{Deserialize, Serialize};

/// Minimum time to move one joint by `d` from rest to rest.
pub fn joint_trapezoid_time(d: f64, v_max: f64, a_max: f64) -> f64 {
    let d = d.abs();
    if d == 0.0 {
        return 0.0;
    }
    if d >= v_max * v_max / a_max {
        d / v_max + v_max / a_max
    } else {
        2.0 * (d / a_max).sqrt()
    }
}

/// Time of the slowest joint; every joint is stretched to this duration.
pub fn trapezoid_duration(delta: &[f64], v_max: &[f64], a_max: &[f64]) -> f64 {
    delta
        .iter()
        .zip(v_max)
        .zip(a_max)
        .map(|((&d, &v), &a)| joint_trapezoid_time(d, v, a))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct JointProfile {
    dir: f64,
    cruise: f64,
    accel: f64,
    t_acc: f64,
}

impl JointProfile {
    /// Full-acceleration profile covering `d` in exactly `t`; needs `t` at least the
    /// joint's own minimum time.
    fn fit(d: f64, t: f64, a: f64) -> Self {
        let dist = d.abs();
        if dist == 0.0 || t == 0.0 {
            return Self {
                dir: 0.0,
                cruise: 0.0,
                accel: 0.0,
                t_acc: 0.0,
            };
        }
        let disc = (a * a * t * t - 4.0 * a * dist).max(0.0);
        let cruise = 2.0 * a * dist / (a * t + disc.sqrt());
        Self {
            dir: d.signum(),
            cruise,
            accel: a,
            t_acc: (cruise / a).min(0.5 * t),
        }
    }

    fn eval(&self, tau: f64, t: f64, d: f64) -> (f64, f64, f64) {
        if self.dir == 0.0 || tau <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if tau >= t {
            return (d, 0.0, 0.0);
        }
        let (a, v, ta) = (self.accel, self.cruise, self.t_acc);
        let (s, sd, sdd) = if tau < ta {
            (0.5 * a * tau * tau, a * tau, a)
        } else if tau <= t - ta {
            (0.5 * a * ta * ta + v * (tau - ta), v, 0.0)
        } else {
            let r = t - tau;
            (d.abs() - 0.5 * a * r * r, a * r, -a)
        };
        (self.dir * s, self.dir * sd, self.dir * sdd)
    }
}

/// Rest-to-rest joint motion where all joints start and stop together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncMotion {
    start: Vec<f64>,
    delta: Vec<f64>,
    duration: f64,
    profiles: Vec<JointProfile>,
}

impl SyncMotion {
    pub fn new(start: &[f64], end: &[f64], v_max: &[f64], a_max: &[f64]) -> Self {
        let delta: Vec<f64> = end.iter().zip(start).map(|(e, s)| e - s).collect();
        let duration = trapezoid_duration(&delta, v_max, a_max);
        let profiles = delta
            .iter()
            .zip(a_max)
            .map(|(&d, &a)| JointProfile::fit(d, duration, a))
            .collect();
        Self {
            start: start.to_vec(),
            delta,
            duration,
            profiles,
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn end(&self) -> Vec<f64> {
        self.start.iter().zip(&self.delta).map(|(s, d)| s + d).collect()
    }

    pub(crate) fn eval_into(&self, tau: f64, q: &mut [f64], qd: &mut [f64], qdd: &mut [f64]) {
        for i in 0..self.start.len() {
            let (s, sd, sdd) = self.profiles[i].eval(tau, self.duration, self.delta[i]);
            q[i] = self.start[i] + s;
            qd[i] = sd;
            qdd[i] = sdd;
        }
    }
}
