//! First-success greedy planning through the task poses.

use std::cmp::Ordering;
use std::time::Instant;

use super::{extend, GreedyMetric, MotionGraph, PlanOutcome, PlanSegment, PlanStats};
use crate::model::{Composition, JointConfig, UnwrappedTarget};
use crate::seed::{derive_seed, hash_str};
use crate::traj::Connector;
use crate::world::Scenario;

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn distance(t: &UnwrappedTarget, metric: GreedyMetric, v_max: &[f64]) -> f64 {
    let d = t.displacement();
    match metric {
        GreedyMetric::Euclidean => d.iter().map(|x| x * x).sum::<f64>().sqrt(),
        GreedyMetric::WeightedLinf => d.iter().zip(v_max).map(|(x, v)| x.abs() / v).fold(0.0, f64::max),
    }
}

/// Starts at the minimum-norm first-layer configuration; at every next pose
/// tries the candidate targets nearest first and keeps the first feasible one.
pub fn plan_greedy_on_graph(
    graph: &MotionGraph,
    comp: &Composition,
    s: &Scenario,
    connector: &Connector,
    metric: GreedyMetric,
    seed: u64,
) -> PlanOutcome {
    let started = Instant::now();
    let mut stats = PlanStats {
        nodes: graph.n_nodes(),
        ..PlanStats::default()
    };
    let done = |mut stats: PlanStats| {
        stats.wall_time = started.elapsed().as_secs_f64();
        stats
    };
    if !graph.is_feasible() {
        return PlanOutcome::infeasible(done(stats));
    }
    let layers = graph.layers();
    let v_max = comp.v_max();
    let start = layers[0]
        .iter()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()).then_with(|| lex(a.as_slice(), b.as_slice())))
        .expect("non-empty layer")
        .clone();

    let tag = hash_str("greedy");
    let mut q_s: JointConfig = start.clone();
    let mut cost = 0.0;
    let mut segments = Vec::with_capacity(layers.len().saturating_sub(1));
    for (li, layer) in layers.iter().enumerate().skip(1) {
        // (distance, target, node) sorted by distance, then joint values, then
        // candidate index.
        let mut cands: Vec<(f64, UnwrappedTarget, usize)> = Vec::new();
        for (ni, node) in layer.iter().enumerate() {
            for t in extend(&q_s, node).expect("same composition") {
                cands.push((distance(&t, metric, &v_max), t, ni));
            }
        }
        let order = |a: &(f64, UnwrappedTarget, usize), b: &(f64, UnwrappedTarget, usize)| {
            a.0.total_cmp(&b.0).then_with(|| lex(&a.1.q_abs, &b.1.q_abs))
        };
        cands.sort_by(order);

        let payload = graph.carried(li);
        let mut accepted = None;
        for (rank, (_, target, ni)) in cands.into_iter().enumerate() {
            let r = connector.connect(
                comp,
                &q_s,
                &target,
                s,
                payload,
                derive_seed(seed, &[tag, li as u64, rank as u64]),
            );
            stats.connector_calls += 1;
            if r.feasible {
                accepted = Some((target, r, ni));
                break;
            }
        }
        let Some((target, r, ni)) = accepted else {
            return PlanOutcome::infeasible(done(stats));
        };
        stats.edges_evaluated += 1;
        cost += r.cost;
        segments.push(PlanSegment { target, edge: r });
        // The accepted node is the canonical form of the reached target.
        q_s = layer[ni].clone();
    }
    PlanOutcome {
        cost,
        start: Some(start),
        plan: Some(segments),
        stats: done(stats),
    }
}
