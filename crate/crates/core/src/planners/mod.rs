//! Motion-level planners over the layered IK graph.
//!
//! Every planner takes a master seed. Stochastic connectors get per-edge seeds
//! derived from it, so Dijkstra and A* see identical edge costs.

mod graph;
mod greedy;
mod search;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{Composition, IkConfig, JointConfig, ModelError, UnwrappedTarget};
use crate::numeric::{inf_as_null, wrap_angle, TAU};
use crate::seed::derive_seed;
use crate::traj::{Connector, EdgeResult};
use crate::world::{BoxSpec, Scenario, TaskSequence};

pub use graph::{build_graph, MotionGraph};
pub use greedy::plan_greedy_on_graph;
pub use search::{plan_astar_on_graph, plan_near_optimal_on_graph};

/// The 2^n_q absolute targets reaching `q_e` from `q_s`. Bit `i` of the way
/// index selects the full-turn alternative on joint `i`.
pub fn extend(q_s: &JointConfig, q_e: &JointConfig) -> Result<Vec<UnwrappedTarget>, ModelError> {
    if q_s.len() != q_e.len() {
        return Err(ModelError::DimensionMismatch {
            expected: q_s.len(),
            got: q_e.len(),
        });
    }
    let n = q_s.len();
    let d: Vec<f64> = q_e
        .as_slice()
        .iter()
        .zip(q_s.as_slice())
        .map(|(e, s)| wrap_angle(e - s))
        .collect();
    (0..1usize << n)
        .map(|way| {
            let q_abs = (0..n)
                .map(|i| {
                    let s = q_s.as_slice()[i];
                    if way >> i & 1 == 0 {
                        s + d[i]
                    } else {
                        // sgn+(0) = +1: a zero move also gets a full negative turn.
                        let sgn = if d[i] >= 0.0 { 1.0 } else { -1.0 };
                        s + d[i] - TAU * sgn
                    }
                })
                .collect();
            UnwrappedTarget::new(q_abs, q_s.clone())
        })
        .collect()
}

/// Lower bound on the motion time between two configurations over all ways.
pub fn heuristic(u: &JointConfig, v: &JointConfig, v_max: &[f64]) -> f64 {
    u.as_slice()
        .iter()
        .zip(v.as_slice())
        .zip(v_max)
        .map(|((a, b), vm)| {
            let d = wrap_angle(b - a).abs();
            d.min(TAU - d) / vm
        })
        .fold(0.0, f64::max)
}

/// Cheapest way of an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BestWay {
    pub way: usize,
    pub target: UnwrappedTarget,
    pub result: EdgeResult,
    pub calls: usize,
}

/// Runs the connector on every way of `u -> v` and keeps the cheapest; ties go
/// to the lower way index. Way `k` uses the seed `derive_seed(seed, [k])`.
pub fn best_way_cost(
    connector: &Connector,
    comp: &Composition,
    u: &JointConfig,
    v: &JointConfig,
    s: &Scenario,
    payload: Option<&BoxSpec>,
    seed: u64,
) -> BestWay {
    let started = Instant::now();
    let ways = extend(u, v).expect("edge endpoints share the composition");
    let calls = ways.len();
    let mut best: Option<BestWay> = None;
    for (k, target) in ways.into_iter().enumerate() {
        let r = connector.connect(comp, u, &target, s, payload, derive_seed(seed, &[k as u64]));
        if best.as_ref().is_none_or(|b| r.cost < b.result.cost) {
            best = Some(BestWay {
                way: k,
                target,
                result: r,
                calls,
            });
        }
    }
    let mut best = best.expect("at least one way");
    best.result.wall_time = started.elapsed().as_secs_f64();
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    #[serde(alias = "near_optimal")]
    Dijkstra,
    Astar,
    Greedy,
}

/// Candidate ordering used by the greedy planners.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyMetric {
    /// Euclidean norm of the unwrapped displacement.
    #[default]
    Euclidean,
    /// Max over joints of |displacement| / v_max.
    WeightedLinf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub ik: IkConfig,
    pub greedy_metric: GreedyMetric,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub nodes: usize,
    pub edges_evaluated: usize,
    pub connector_calls: usize,
    pub wall_time: f64,
}

/// One executed edge of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSegment {
    pub target: UnwrappedTarget,
    pub edge: EdgeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    /// Summed segment durations in seconds; infinite when no plan exists.
    #[serde(with = "inf_as_null")]
    pub cost: f64,
    /// Configuration at the first task pose.
    pub start: Option<JointConfig>,
    pub plan: Option<Vec<PlanSegment>>,
    pub stats: PlanStats,
}

impl PlanOutcome {
    pub(crate) fn infeasible(stats: PlanStats) -> Self {
        Self {
            cost: f64::INFINITY,
            start: None,
            plan: None,
            stats,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.cost.is_finite()
    }
}

/// Builds the graph and runs the requested planner; wall time covers both.
pub fn plan(
    kind: PlannerKind,
    comp: &Composition,
    tasks: &TaskSequence,
    s: &Scenario,
    connector: &Connector,
    cfg: &PlannerConfig,
    seed: u64,
) -> PlanOutcome {
    let started = Instant::now();
    let graph = build_graph(comp, tasks, s, &cfg.ik);
    let mut out = match kind {
        PlannerKind::Dijkstra => plan_near_optimal_on_graph(&graph, comp, s, connector, seed),
        PlannerKind::Astar => plan_astar_on_graph(&graph, comp, s, connector, seed),
        PlannerKind::Greedy => plan_greedy_on_graph(&graph, comp, s, connector, cfg.greedy_metric, seed),
    };
    out.stats.wall_time = started.elapsed().as_secs_f64();
    out
}

pub fn plan_near_optimal(
    comp: &Composition,
    tasks: &TaskSequence,
    s: &Scenario,
    connector: &Connector,
    cfg: &PlannerConfig,
    seed: u64,
) -> PlanOutcome {
    plan(PlannerKind::Dijkstra, comp, tasks, s, connector, cfg, seed)
}

pub fn plan_astar(
    comp: &Composition,
    tasks: &TaskSequence,
    s: &Scenario,
    connector: &Connector,
    cfg: &PlannerConfig,
    seed: u64,
) -> PlanOutcome {
    plan(PlannerKind::Astar, comp, tasks, s, connector, cfg, seed)
}

pub fn plan_greedy(
    comp: &Composition,
    tasks: &TaskSequence,
    s: &Scenario,
    connector: &Connector,
    cfg: &PlannerConfig,
    seed: u64,
) -> PlanOutcome {
    plan(PlannerKind::Greedy, comp, tasks, s, connector, cfg, seed)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::model::canonicalize;

    fn jc(q: &[f64]) -> JointConfig {
        canonicalize(q).unwrap()
    }

    #[test]
    fn extend_examples() {
        let t = extend(&jc(&[0.0]), &jc(&[FRAC_PI_2])).unwrap();
        assert_eq!(t[0].q_abs, vec![FRAC_PI_2]);
        assert_eq!(t[1].q_abs, vec![FRAC_PI_2 - TAU]);
        assert_eq!(extend(&jc(&[0.0, 1.0]), &jc(&[1.0, 0.0])).unwrap().len(), 4);
        let z = extend(&jc(&[0.0]), &jc(&[0.0])).unwrap();
        assert_eq!(z[0].q_abs, vec![0.0]);
        assert_eq!(z[1].q_abs, vec![-TAU]);
        assert!(extend(&jc(&[0.0]), &jc(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn extend_wraps_back_to_the_goal() {
        let a = jc(&[3.0, -3.0, PI]);
        let b = jc(&[-3.0, 3.0, -1.0]);
        for t in extend(&a, &b).unwrap() {
            for (x, y) in t.canonical().as_slice().iter().zip(b.as_slice()) {
                assert!(wrap_angle(x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heuristic_examples() {
        assert_eq!(heuristic(&jc(&[0.3, 0.1]), &jc(&[0.3, 0.1]), &[1.0, 1.0]), 0.0);
        assert!((heuristic(&jc(&[0.0, 0.0]), &jc(&[1.0, -2.0]), &[1.0, 1.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn best_way_picks_the_short_side() {
        let comp = Composition::serial(&[1.0], 1.0, 1e9).unwrap();
        let s = Scenario::free_space(Vec::new());
        let bw = best_way_cost(&Connector::Deterministic, &comp, &jc(&[0.0]), &jc(&[3.0]), &s, None, 0);
        assert_eq!(bw.way, 0);
        assert!((bw.result.cost - 3.0).abs() < 1e-3);
        assert_eq!(bw.calls, 2);
        let zero = best_way_cost(&Connector::Deterministic, &comp, &jc(&[1.0]), &jc(&[1.0]), &s, None, 0);
        assert_eq!(zero.result.cost, 0.0);
    }
}
