//! Budgeted bidirectional RRT inside the monotone corridor of an edge.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_edge_deterministic, EdgeResult, Trajectory};
use crate::model::{Composition, JointConfig, UnwrappedTarget};
use crate::world::{collides, BoxSpec, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Wall-clock limit in seconds.
    pub time_budget: f64,
    /// Iteration cap; keeps results reproducible when it binds before the clock.
    pub max_iterations: usize,
    pub goal_bias: f64,
    pub shortcut_passes: usize,
    /// Tree extension step in joint space, rad.
    pub step_size: f64,
    /// Spacing of collision checks along tree edges (max-norm), rad.
    pub check_resolution: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            time_budget: 0.5,
            max_iterations: 1000,
            goal_bias: 0.1,
            shortcut_passes: 50,
            step_size: 0.3,
            check_resolution: 0.02,
        }
    }
}

impl SamplingConfig {
    pub fn is_valid(&self) -> bool {
        self.time_budget > 0.0
            && self.max_iterations > 0
            && (0.0..=1.0).contains(&self.goal_bias)
            && self.step_size > 0.0
            && self.check_resolution > 0.0
    }
}

struct Node {
    q: Vec<f64>,
    parent: Option<usize>,
}

enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

struct Checker<'a> {
    comp: &'a Composition,
    s: &'a Scenario,
    payload: Option<&'a BoxSpec>,
    resolution: f64,
}

impl Checker<'_> {
    fn free(&self, q: &[f64]) -> bool {
        !collides(self.comp, q, self.s, self.payload)
    }

    fn motion_free(&self, a: &[f64], b: &[f64]) -> bool {
        let span = a.iter().zip(b).map(|(x, y)| (y - x).abs()).fold(0.0, f64::max);
        let n = (span / self.resolution).ceil().max(1.0) as usize;
        let mut q = vec![0.0; a.len()];
        (1..=n).all(|k| {
            let t = k as f64 / n as f64;
            for i in 0..a.len() {
                q[i] = a[i] + t * (b[i] - a[i]);
            }
            self.free(&q)
        })
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn nearest(tree: &[Node], q: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, n) in tree.iter().enumerate() {
        let d = dist(&n.q, q);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn extend(tree: &mut Vec<Node>, q: &[f64], step: f64, check: &Checker) -> Extend {
    let near = nearest(tree, q);
    let from = &tree[near].q;
    let d = dist(from, q);
    let (q_new, reached) = if d <= step {
        (q.to_vec(), true)
    } else {
        (from.iter().zip(q).map(|(a, b)| a + (b - a) * step / d).collect(), false)
    };
    if !check.motion_free(from, &q_new) {
        return Extend::Trapped;
    }
    tree.push(Node {
        q: q_new,
        parent: Some(near),
    });
    let idx = tree.len() - 1;
    if reached {
        Extend::Reached(idx)
    } else {
        Extend::Advanced(idx)
    }
}

fn branch(tree: &[Node], mut i: usize) -> Vec<Vec<f64>> {
    let mut out = vec![tree[i].q.clone()];
    while let Some(p) = tree[i].parent {
        out.push(tree[p].q.clone());
        i = p;
    }
    out
}

/// Finds a collision-free polyline from `q_s` to `target` within the box spanned
/// by the two, shortcuts it and times each leg rest to rest.
///
/// The straight motion is tried first. On failure or timeout the straight
/// motion's (violating) result is returned.
pub fn sampling_connect<R: Rng + ?Sized>(
    comp: &Composition,
    q_s: &JointConfig,
    target: &UnwrappedTarget,
    s: &Scenario,
    payload: Option<&BoxSpec>,
    cfg: &SamplingConfig,
    rng: &mut R,
) -> EdgeResult {
    let started = Instant::now();
    assert!(cfg.is_valid(), "sampling budget must be positive");
    let mut direct = evaluate_edge_deterministic(comp, q_s, target, s, payload);
    if direct.feasible {
        direct.wall_time = started.elapsed().as_secs_f64();
        return direct;
    }
    let give_up = |mut r: EdgeResult| {
        r.wall_time = started.elapsed().as_secs_f64();
        r
    };
    let check = Checker {
        comp,
        s,
        payload,
        resolution: cfg.check_resolution,
    };
    let start = q_s.as_slice().to_vec();
    let goal = target.q_abs.clone();
    if !check.free(&start) || !check.free(&goal) {
        return give_up(direct);
    }
    let lo: Vec<f64> = start.iter().zip(&goal).map(|(a, b)| a.min(*b)).collect();
    let hi: Vec<f64> = start.iter().zip(&goal).map(|(a, b)| a.max(*b)).collect();

    // trees[0] grows from the start, trees[1] from the goal.
    let mut trees = [
        vec![Node {
            q: start.clone(),
            parent: None,
        }],
        vec![Node {
            q: goal.clone(),
            parent: None,
        }],
    ];
    let mut a = 0;
    let mut meet = None;
    for _ in 0..cfg.max_iterations {
        if started.elapsed().as_secs_f64() > cfg.time_budget {
            break;
        }
        let q_rand: Vec<f64> = if rng.random::<f64>() < cfg.goal_bias {
            trees[1 - a][0].q.clone()
        } else {
            lo.iter()
                .zip(&hi)
                .map(|(&l, &h)| if h > l { rng.random_range(l..=h) } else { l })
                .collect()
        };
        let new = match extend(&mut trees[a], &q_rand, cfg.step_size, &check) {
            Extend::Trapped => None,
            Extend::Advanced(i) | Extend::Reached(i) => Some(i),
        };
        if let Some(i) = new {
            let q_new = trees[a][i].q.clone();
            let b = 1 - a;
            loop {
                match extend(&mut trees[b], &q_new, cfg.step_size, &check) {
                    Extend::Advanced(_) => continue,
                    Extend::Reached(j) => {
                        meet = Some(if a == 0 { (i, j) } else { (j, i) });
                        break;
                    }
                    Extend::Trapped => break,
                }
            }
        }
        if meet.is_some() {
            break;
        }
        a = 1 - a;
    }
    let Some((i0, i1)) = meet else {
        return give_up(direct);
    };

    let mut path = branch(&trees[0], i0);
    path.reverse();
    let mut tail = branch(&trees[1], i1);
    tail.remove(0);
    path.extend(tail);
    path.dedup();

    for _ in 0..cfg.shortcut_passes {
        if path.len() < 3 {
            break;
        }
        let i = rng.random_range(0..path.len() - 2);
        let j = rng.random_range(i + 2..path.len());
        if check.motion_free(&path[i], &path[j]) {
            path.drain(i + 1..j);
        }
    }

    let traj = Trajectory::through_waypoints(&path, &comp.v_max(), &comp.a_max());
    let r = EdgeResult::checked(traj, comp, s, payload, started);
    if r.feasible {
        r
    } else {
        give_up(direct)
    }
}
