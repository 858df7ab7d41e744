use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::point_rect_distance;
use super::{obstacle_clearance, BoxSpec, Complexity, Obstacle, Rect, Scenario, WorldError, MAX_BOXES, SCENARIO_SCHEMA};
use crate::model::Pose2;
use crate::seed::rng_from;

const MAX_ATTEMPTS: usize = 1000;

/// Knobs of the random palletization generator. Ranges are inclusive `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    pub complexity: Complexity,
    pub box_count: [usize; 2],
    pub box_size: [f64; 2],
    pub box_mass: [f64; 2],
    pub conveyor_distance: [f64; 2],
    pub conveyor_size: [f64; 2],
    pub pallet_distance: [f64; 2],
    pub pallet_size: [f64; 2],
    pub base_clearance: f64,
    pub link_radius: f64,
    /// Pillars, complex class only.
    pub pillar_count: [usize; 2],
    pub pillar_radius: [f64; 2],
    /// Distance of pillar centers from the base.
    pub pillar_distance: [f64; 2],
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            complexity: Complexity::Simple,
            box_count: [1, 4],
            box_size: [0.1, 0.25],
            box_mass: [0.5, 3.0],
            conveyor_distance: [0.75, 0.95],
            conveyor_size: [0.25, 0.45],
            pallet_distance: [0.8, 1.0],
            pallet_size: [0.35, 0.55],
            base_clearance: 0.2,
            link_radius: 0.05,
            pillar_count: [1, 3],
            pillar_radius: [0.04, 0.08],
            pillar_distance: [0.3, 0.6],
        }
    }
}

impl GeneratorParams {
    pub fn simple() -> Self {
        Self::default()
    }

    pub fn complex() -> Self {
        Self {
            complexity: Complexity::Complex,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: &str| Err(WorldError::InvalidParams(m.to_string()));
        let [bmin, bmax] = self.box_count;
        if bmin < 1 || bmax > MAX_BOXES || bmin > bmax {
            return bad("box_count must satisfy 1 <= lo <= hi <= 4");
        }
        let ranges = [
            ("box_size", self.box_size),
            ("box_mass", self.box_mass),
            ("conveyor_distance", self.conveyor_distance),
            ("conveyor_size", self.conveyor_size),
            ("pallet_distance", self.pallet_distance),
            ("pallet_size", self.pallet_size),
            ("pillar_radius", self.pillar_radius),
            ("pillar_distance", self.pillar_distance),
        ];
        for (name, [lo, hi]) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
                return Err(WorldError::InvalidParams(format!("{name} must be a finite range with 0 <= lo <= hi")));
            }
        }
        if self.box_size[0] <= 0.0 || self.conveyor_size[0] <= 0.0 || self.pallet_size[0] <= 0.0 {
            return bad("sizes must be positive");
        }
        if self.complexity == Complexity::Complex
            && (self.pillar_radius[0] <= 0.0 || self.pillar_count[0] > self.pillar_count[1])
        {
            return bad("pillars need positive radius and lo <= hi count");
        }
        if !(self.base_clearance >= 0.0 && self.link_radius >= 0.0) {
            return bad("clearances must be non-negative");
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn count(rng: &mut ChaCha8Rng, [lo, hi]: [usize; 2]) -> usize {
    rng.random_range(lo..=hi)
}

fn random_region(rng: &mut ChaCha8Rng, distance: [f64; 2], size: [f64; 2]) -> Rect {
    let d = uniform(rng, distance);
    let a = rng.random_range(-PI..PI);
    let (w, h) = (uniform(rng, size), uniform(rng, size));
    let c = [d * a.cos(), d * a.sin()];
    Rect::new([c[0] - 0.5 * w, c[1] - 0.5 * h], [c[0] + 0.5 * w, c[1] + 0.5 * h])
}

fn radial_pose(p: [f64; 2]) -> Pose2 {
    Pose2::new(p[0], p[1], p[1].atan2(p[0]))
}

/// Edges of `r` that face the origin, as (start, end) pairs.
fn visible_edges(r: &Rect) -> Vec<([f64; 2], [f64; 2])> {
    let mut edges = Vec::new();
    if r.min[0] > 0.0 {
        edges.push(([r.min[0], r.min[1]], [r.min[0], r.max[1]]));
    }
    if r.max[0] < 0.0 {
        edges.push(([r.max[0], r.min[1]], [r.max[0], r.max[1]]));
    }
    if r.min[1] > 0.0 {
        edges.push(([r.min[0], r.min[1]], [r.max[0], r.min[1]]));
    }
    if r.max[1] < 0.0 {
        edges.push(([r.min[0], r.max[1]], [r.max[0], r.max[1]]));
    }
    edges
}

fn sample_on_edges(rng: &mut ChaCha8Rng, edges: &[([f64; 2], [f64; 2])]) -> [f64; 2] {
    let lens: Vec<f64> = edges
        .iter()
        .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
        .collect();
    let total: f64 = lens.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut idx = edges.len() - 1;
    for (i, l) in lens.iter().enumerate() {
        if pick < *l {
            idx = i;
            break;
        }
        pick -= l;
    }
    // Stay off the corners.
    let t = rng.random_range(0.1..=0.9);
    let (a, b) = edges[idx];
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn rect_gap(a: &Rect, b: &Rect) -> f64 {
    let dx = (a.min[0] - b.max[0]).max(b.min[0] - a.max[0]).max(0.0);
    let dy = (a.min[1] - b.max[1]).max(b.min[1] - a.max[1]).max(0.0);
    dx.hypot(dy)
}

/// Deterministic random scenario for `(seed, params)`.
///
/// Draw order is fixed (regions, boxes, place poses, pillars) so the output
/// only depends on the seed and the parameters.
pub fn generate_scenario(seed: u64, params: &GeneratorParams) -> Result<Scenario, WorldError> {
    params.validate()?;
    let mut rng = rng_from(seed);
    let clear_of_base = |r: &Rect| point_rect_distance([0.0, 0.0], r.min, r.max) > params.base_clearance;

    let mut regions = None;
    for _ in 0..MAX_ATTEMPTS {
        let conveyor = random_region(&mut rng, params.conveyor_distance, params.conveyor_size);
        let pallet = random_region(&mut rng, params.pallet_distance, params.pallet_size);
        if clear_of_base(&conveyor)
            && clear_of_base(&pallet)
            && rect_gap(&conveyor, &pallet) > 2.0 * params.link_radius
        {
            regions = Some((conveyor, pallet));
            break;
        }
    }
    let (conveyor, pallet) = regions.ok_or(WorldError::PlacementFailed {
        what: "conveyor and pallet",
        attempts: MAX_ATTEMPTS,
    })?;

    let n_boxes = count(&mut rng, params.box_count);
    let boxes: Vec<BoxSpec> = (0..n_boxes)
        .map(|_| BoxSpec {
            size: [uniform(&mut rng, params.box_size), uniform(&mut rng, params.box_size)],
            mass: uniform(&mut rng, params.box_mass),
        })
        .collect();

    let pick_point = [
        0.0f64.clamp(conveyor.min[0], conveyor.max[0]),
        0.0f64.clamp(conveyor.min[1], conveyor.max[1]),
    ];
    let pick_pose = radial_pose(pick_point);
    let edges = visible_edges(&pallet);
    let place_poses: Vec<Pose2> = (0..n_boxes)
        .map(|_| radial_pose(sample_on_edges(&mut rng, &edges)))
        .collect();

    let mut obstacles = Vec::new();
    if params.complexity == Complexity::Complex {
        let n_pillars = count(&mut rng, params.pillar_count);
        let task_points: Vec<[f64; 2]> = std::iter::once(pick_point)
            .chain(place_poses.iter().map(|p| [p.x, p.y]))
            .collect();
        for _ in 0..n_pillars {
            let mut placed = false;
            for _ in 0..MAX_ATTEMPTS {
                let d = uniform(&mut rng, params.pillar_distance);
                let a = rng.random_range(-PI..PI);
                let radius = uniform(&mut rng, params.pillar_radius);
                let center = [d * a.cos(), d * a.sin()];
                let pillar = Obstacle::Disc { center, radius };
                let margin = radius + 2.0 * params.link_radius;
                let ok = d - radius > params.base_clearance
                    && point_rect_distance(center, conveyor.min, conveyor.max) > margin
                    && point_rect_distance(center, pallet.min, pallet.max) > margin
                    && task_points
                        .iter()
                        .all(|p| (p[0] - center[0]).hypot(p[1] - center[1]) > margin);
                let probe = Scenario {
                    obstacles: obstacles.clone(),
                    ..Scenario::open_world(conveyor, pallet, pick_pose, Vec::new(), Vec::new())
                };
                if ok && obstacle_clearance(&probe, center) > radius {
                    obstacles.push(pillar);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(WorldError::PlacementFailed {
                    what: "pillar",
                    attempts: MAX_ATTEMPTS,
                });
            }
        }
    }

    let scenario = Scenario {
        schema: SCENARIO_SCHEMA.to_string(),
        seed,
        complexity: params.complexity,
        link_radius: params.link_radius,
        region_tolerance: 1e-3,
        base_clearance: params.base_clearance,
        obstacles,
        conveyor_region: conveyor,
        pallet_region: pallet,
        boxes,
        pick_pose,
        place_poses,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::task_sequence;

    #[test]
    fn same_seed_same_bytes() {
        let p = GeneratorParams::complex();
        let a = generate_scenario(7, &p).unwrap().to_json();
        let b = generate_scenario(7, &p).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, generate_scenario(8, &p).unwrap().to_json());
    }

    #[test]
    fn simple_class_has_no_obstacles() {
        for seed in 0..50 {
            let s = generate_scenario(seed, &GeneratorParams::simple()).unwrap();
            assert!(s.obstacles.is_empty());
        }
    }

    #[test]
    fn complex_class_places_pillars_near_base() {
        for seed in 0..50 {
            let s = generate_scenario(seed, &GeneratorParams::complex()).unwrap();
            assert!((1..=3).contains(&s.obstacles.len()));
            for o in &s.obstacles {
                let Obstacle::Disc { center, .. } = o else { panic!("pillars are discs") };
                assert!(center[0].hypot(center[1]) <= 0.6 + 1e-12);
            }
        }
    }

    #[test]
    fn box_range_and_sequence_length() {
        let p = GeneratorParams {
            box_count: [2, 4],
            ..GeneratorParams::default()
        };
        for seed in 0..50 {
            let s = generate_scenario(seed, &p).unwrap();
            assert!((2..=4).contains(&s.boxes.len()));
            assert_eq!(task_sequence(&s).len(), 2 * s.boxes.len());
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = GeneratorParams {
            box_count: [0, 5],
            ..GeneratorParams::default()
        };
        assert!(matches!(generate_scenario(1, &p), Err(WorldError::InvalidParams(_))));
        // Regions can never clear a base keep-out this large.
        let p = GeneratorParams {
            base_clearance: 5.0,
            ..GeneratorParams::default()
        };
        assert!(matches!(generate_scenario(1, &p), Err(WorldError::PlacementFailed { .. })));
    }

    #[test]
    fn json_round_trip_validates() {
        let s = generate_scenario(3, &GeneratorParams::complex()).unwrap();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(s.to_json().contains("\"schema\": \"cellforge-scenario/1\""));
    }
}
