//! Cross-entropy search over spline via points and the two-stage wrapper.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{count_violations, violation_step, EdgeResult, SplineMotion, SyncMotion, Trajectory};
use crate::model::{Composition, JointConfig, UnwrappedTarget};
use crate::world::{BoxSpec, Scenario};

/// Weight of one violating sample in the candidate cost.
pub const VIOLATION_PENALTY: f64 = 100.0;

/// Cross-entropy search budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CemBudget {
    pub n_iter: usize,
    pub population: usize,
    pub n_via: usize,
    pub elite_frac: f64,
    /// Initial per-coordinate standard deviation of the via points, rad.
    pub init_sigma: f64,
    /// Weight of the new elite statistics in each update.
    pub smoothing: f64,
}

impl Default for CemBudget {
    fn default() -> Self {
        Self::full()
    }
}

impl CemBudget {
    pub fn cheap() -> Self {
        Self {
            n_iter: 10,
            ..Self::full()
        }
    }

    pub fn full() -> Self {
        Self {
            n_iter: 100,
            population: 64,
            n_via: 3,
            elite_frac: 0.2,
            init_sigma: 0.5,
            smoothing: 0.7,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.n_iter > 0
            && self.population > 0
            && self.n_via > 0
            && self.elite_frac > 0.0
            && self.elite_frac <= 1.0
            && self.init_sigma > 0.0
            && self.smoothing > 0.0
            && self.smoothing <= 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoStageBudget {
    pub cheap: CemBudget,
    pub full: CemBudget,
}

impl Default for TwoStageBudget {
    fn default() -> Self {
        Self {
            cheap: CemBudget::cheap(),
            full: CemBudget::full(),
        }
    }
}

fn candidate_cost(traj: &Trajectory, comp: &Composition, s: &Scenario, payload: Option<&BoxSpec>) -> (f64, usize) {
    let n_c = count_violations(traj, comp, s, payload, violation_step(traj.duration()));
    (traj.duration() + VIOLATION_PENALTY * n_c as f64, n_c)
}

/// Minimizes `T + 100 n_c` over clamped splines through `n_via` via points.
///
/// The straight synchronized motion is kept as a candidate. When it is already
/// violation-free it meets the kinematic lower bound and is returned at once.
pub fn optimize_edge_stochastic<R: Rng + ?Sized>(
    comp: &Composition,
    q_s: &JointConfig,
    target: &UnwrappedTarget,
    s: &Scenario,
    payload: Option<&BoxSpec>,
    budget: &CemBudget,
    rng: &mut R,
) -> EdgeResult {
    let started = Instant::now();
    assert!(budget.is_valid(), "stochastic budget must be positive");
    debug_assert_eq!(q_s, &target.origin);
    let (v_max, a_max) = (comp.v_max(), comp.a_max());
    let q0 = q_s.as_slice();
    let q1 = &target.q_abs;

    let direct = SyncMotion::new(q0, q1, &v_max, &a_max);
    let direct_traj = Trajectory::from_motion(direct.clone());
    let (mut best_cost, mut best_n_c) = candidate_cost(&direct_traj, comp, s, payload);
    let mut best_traj = direct_traj;
    if best_n_c == 0 || direct.duration() == 0.0 {
        return EdgeResult::with_count(best_traj, best_n_c, started);
    }

    let n_q = q0.len();
    let dim = budget.n_via * n_q;
    let pieces = (budget.n_via + 1) as f64;
    let mut mean = Vec::with_capacity(dim);
    let (mut q, mut qd, mut qdd) = (vec![0.0; n_q], vec![0.0; n_q], vec![0.0; n_q]);
    for k in 1..=budget.n_via {
        direct.eval_into(direct.duration() * k as f64 / pieces, &mut q, &mut qd, &mut qdd);
        mean.extend_from_slice(&q);
    }
    let mut sigma = vec![budget.init_sigma; dim];
    let n_elite = ((budget.elite_frac * budget.population as f64).ceil() as usize).clamp(1, budget.population);

    let build = |x: &[f64]| {
        let mut pts = Vec::with_capacity(budget.n_via + 2);
        pts.push(q0.to_vec());
        pts.extend(x.chunks(n_q).map(<[f64]>::to_vec));
        pts.push(q1.clone());
        Trajectory::from_spline(SplineMotion::through(&pts, &v_max, &a_max))
    };

    let mut pop: Vec<(f64, Vec<f64>)> = Vec::with_capacity(budget.population);
    for _ in 0..budget.n_iter {
        pop.clear();
        for _ in 0..budget.population {
            let x: Vec<f64> = mean
                .iter()
                .zip(&sigma)
                .map(|(m, sd)| m + sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let traj = build(&x);
            let (cost, n_c) = candidate_cost(&traj, comp, s, payload);
            if cost < best_cost {
                best_cost = cost;
                best_n_c = n_c;
                best_traj = traj;
            }
            pop.push((cost, x));
        }
        // Stable sort keeps sampling order among equal costs.
        pop.sort_by(|a, b| a.0.total_cmp(&b.0));
        let elites = &pop[..n_elite];
        let w = budget.smoothing;
        for d in 0..dim {
            let m = elites.iter().map(|e| e.1[d]).sum::<f64>() / n_elite as f64;
            let var = elites.iter().map(|e| (e.1[d] - m).powi(2)).sum::<f64>() / n_elite as f64;
            mean[d] = w * m + (1.0 - w) * mean[d];
            sigma[d] = (w * var.sqrt() + (1.0 - w) * sigma[d]).max(1e-6);
        }
    }
    EdgeResult::with_count(best_traj, best_n_c, started)
}

/// Cheap feasibility probe followed, on success, by the full search.
pub fn two_stage_connect<R: Rng + ?Sized>(
    comp: &Composition,
    q_s: &JointConfig,
    target: &UnwrappedTarget,
    s: &Scenario,
    payload: Option<&BoxSpec>,
    budgets: &TwoStageBudget,
    rng: &mut R,
) -> EdgeResult {
    let started = Instant::now();
    let first = optimize_edge_stochastic(comp, q_s, target, s, payload, &budgets.cheap, rng);
    let mut best = if !first.feasible || first.cost == 0.0 {
        first
    } else {
        let second = optimize_edge_stochastic(comp, q_s, target, s, payload, &budgets.full, rng);
        if second.cost < first.cost {
            second
        } else {
            first
        }
    };
    best.wall_time = started.elapsed().as_secs_f64();
    best
}
