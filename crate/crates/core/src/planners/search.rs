//! Dijkstra and A* over the layered graph with lazy edge evaluation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{best_way_cost, heuristic, BestWay, MotionGraph, PlanOutcome, PlanSegment, PlanStats};
use crate::model::Composition;
use crate::seed::derive_seed;
use crate::traj::Connector;
use crate::world::Scenario;

/// Seed tag of edge `(layer, u, v)`; shared by both searches.
pub(crate) fn edge_seed(seed: u64, layer: usize, u: usize, v: usize) -> u64 {
    derive_seed(seed, &[layer as u64, u as u64, v as u64])
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    key: f64,
    layer: usize,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Smaller key first, then deeper layer, then lower index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then(self.layer.cmp(&other.layer))
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn search(
    graph: &MotionGraph,
    comp: &Composition,
    s: &Scenario,
    connector: &Connector,
    seed: u64,
    use_heuristic: bool,
) -> PlanOutcome {
    let started = Instant::now();
    let mut stats = PlanStats {
        nodes: graph.n_nodes(),
        ..PlanStats::default()
    };
    if !graph.is_feasible() {
        stats.wall_time = started.elapsed().as_secs_f64();
        return PlanOutcome::infeasible(stats);
    }
    let layers = graph.layers();
    let last = layers.len() - 1;
    let v_max = comp.v_max();
    let h: Vec<Vec<f64>> = layers
        .iter()
        .enumerate()
        .map(|(li, layer)| {
            layer
                .iter()
                .map(|q| {
                    if !use_heuristic || li == last {
                        0.0
                    } else {
                        layers[last]
                            .iter()
                            .map(|w| heuristic(q, w, &v_max))
                            .fold(f64::INFINITY, f64::min)
                    }
                })
                .collect()
        })
        .collect();

    let mut g: Vec<Vec<f64>> = layers.iter().map(|l| vec![f64::INFINITY; l.len()]).collect();
    let mut settled: Vec<Vec<bool>> = layers.iter().map(|l| vec![false; l.len()]).collect();
    let mut parent: Vec<Vec<Option<(usize, BestWay)>>> = layers.iter().map(|l| vec![None; l.len()]).collect();
    let mut heap = BinaryHeap::new();
    for i in 0..layers[0].len() {
        g[0][i] = 0.0;
        heap.push(Entry {
            key: h[0][i],
            layer: 0,
            index: i,
        });
    }

    let mut goal = None;
    while let Some(Entry { layer, index, .. }) = heap.pop() {
        if settled[layer][index] {
            continue;
        }
        settled[layer][index] = true;
        if layer == last {
            goal = Some(index);
            break;
        }
        let next = layer + 1;
        let payload = graph.carried(next);
        for v in 0..layers[next].len() {
            if settled[next][v] {
                continue;
            }
            let bw = best_way_cost(
                connector,
                comp,
                &layers[layer][index],
                &layers[next][v],
                s,
                payload,
                edge_seed(seed, layer, index, v),
            );
            stats.edges_evaluated += 1;
            stats.connector_calls += bw.calls;
            let cand = g[layer][index] + bw.result.cost;
            if cand < g[next][v] {
                g[next][v] = cand;
                heap.push(Entry {
                    key: cand + h[next][v],
                    layer: next,
                    index: v,
                });
                parent[next][v] = Some((index, bw));
            }
        }
    }
    stats.wall_time = started.elapsed().as_secs_f64();

    let Some(end) = goal else {
        return PlanOutcome::infeasible(stats);
    };
    let mut segments = Vec::with_capacity(last);
    let mut node = end;
    for layer in (1..=last).rev() {
        let (prev, bw) = parent[layer][node].take().expect("settled node has a parent");
        segments.push(PlanSegment {
            target: bw.target,
            edge: bw.result,
        });
        node = prev;
    }
    segments.reverse();
    PlanOutcome {
        cost: g[last][end],
        start: Some(layers[0][node].clone()),
        plan: Some(segments),
        stats,
    }
}

/// Shortest path from a virtual source tied to every first-layer node to any
/// last-layer node.
pub fn plan_near_optimal_on_graph(
    graph: &MotionGraph,
    comp: &Composition,
    s: &Scenario,
    connector: &Connector,
    seed: u64,
) -> PlanOutcome {
    search(graph, comp, s, connector, seed, false)
}

/// As [`plan_near_optimal_on_graph`], guided by the distance to the nearest
/// last-layer node.
pub fn plan_astar_on_graph(
    graph: &MotionGraph,
    comp: &Composition,
    s: &Scenario,
    connector: &Connector,
    seed: u64,
) -> PlanOutcome {
    search(graph, comp, s, connector, seed, true)
}
