use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kinematics::{fk_unchecked, jacobian_unchecked};
use super::{Composition, JointConfig, Pose2};
use crate::numeric::{wrap_angle, TAU};
use crate::seed::rng_from;

/// Multi-start damped least squares settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    pub eps_pos: f64,
    pub eps_ang: f64,
    pub damping: f64,
    /// Two solutions closer than this on every joint (wrapped) are merged.
    pub dedup_radius: f64,
    /// Seeds the random shift of the Halton start sequence.
    pub seed: u64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            n_starts: 32,
            max_iters: 200,
            eps_pos: 1e-4,
            eps_ang: 1e-4,
            damping: 0.02,
            dedup_radius: 1e-3,
            seed: 0,
        }
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton points in (-pi, pi]^n with a seeded Cranley-Patterson rotation.
fn start_points(n_q: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed);
    let shift: Vec<f64> = (0..n_q).map(|_| rng.random::<f64>()).collect();
    (0..count)
        .map(|k| {
            (0..n_q)
                .map(|d| {
                    let base = u64::from(PRIMES[d % PRIMES.len()]);
                    let u = (radical_inverse(k as u64 + 1, base) + shift[d]).fract();
                    wrap_angle(-PI + TAU * u)
                })
                .collect()
        })
        .collect()
}

fn residual(comp: &Composition, q: &[f64], target: &Pose2) -> Vector3<f64> {
    let (x, y, theta) = fk_unchecked(comp, q);
    Vector3::new(target.x - x, target.y - y, wrap_angle(target.phi - theta))
}

fn within_tolerance(e: &Vector3<f64>, cfg: &IkConfig) -> bool {
    e[0].hypot(e[1]) <= cfg.eps_pos && e[2].abs() <= cfg.eps_ang
}

fn solve_from(comp: &Composition, start: &[f64], target: &Pose2, cfg: &IkConfig) -> Option<Vec<f64>> {
    let mut q = start.to_vec();
    let lambda2 = cfg.damping * cfg.damping;
    let mut e = residual(comp, &q, target);
    for _ in 0..cfg.max_iters {
        if e.norm() < 1e-12 {
            break;
        }
        let j = jacobian_unchecked(comp, &q);
        let jjt = &j * j.transpose() + Matrix3::identity() * lambda2;
        let y = jjt.lu().solve(&e)?;
        let dq = j.transpose() * y;
        for (qi, d) in q.iter_mut().zip(dq.iter()) {
            *qi += d;
        }
        e = residual(comp, &q, target);
        if dq.amax() < 1e-13 {
            break;
        }
    }
    within_tolerance(&e, cfg).then_some(q)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Multi-start numerical IK. Returns the deduplicated canonical solutions in
/// lexicographic order; an unreachable target yields an empty set.
pub fn inverse_kinematics(comp: &Composition, target: &Pose2, cfg: &IkConfig) -> Vec<JointConfig> {
    let starts = start_points(comp.n_q(), cfg.n_starts.max(1), cfg.seed);
    let mut found: Vec<JointConfig> = Vec::new();
    for s in &starts {
        let Some(q) = solve_from(comp, s, target, cfg) else {
            continue;
        };
        let q = JointConfig::from_canonical(q.into_iter().map(wrap_angle).collect());
        // Re-check after wrapping; wrapping never changes FK beyond rounding.
        if !within_tolerance(&residual(comp, q.as_slice(), target), cfg) {
            continue;
        }
        if found
            .iter()
            .all(|f| f.wrapped_distance(&q) > cfg.dedup_radius)
        {
            found.push(q);
        }
    }
    found.sort_by(|a, b| lex_cmp(a.as_slice(), b.as_slice()));
    found
}
