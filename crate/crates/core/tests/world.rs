use std::f64::consts::{PI, TAU};

use cellforge_core::world::{
    collides, generate_scenario, task_sequence, BoxSpec, Complexity, GeneratorParams, Obstacle, Scenario,
};
use cellforge_core::Composition;
use proptest::prelude::*;

fn inside(r: &cellforge_core::world::Rect, x: f64, y: f64) -> bool {
    let tol = 1e-9;
    x >= r.min[0] - tol && x <= r.max[0] + tol && y >= r.min[1] - tol && y <= r.max[1] + tol
}

fn overlaps(a: &cellforge_core::world::Rect, b: &cellforge_core::world::Rect) -> bool {
    a.min[0] < b.max[0] && b.min[0] < a.max[0] && a.min[1] < b.max[1] && b.min[1] < a.max[1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_scenarios_hold_their_invariants(
        seed in any::<u64>(),
        lo in 1usize..=4,
        span in 0usize..=3,
        complex in any::<bool>(),
    ) {
        let hi = (lo + span).min(4);
        let params = GeneratorParams {
            complexity: if complex { Complexity::Complex } else { Complexity::Simple },
            box_count: [lo, hi],
            ..GeneratorParams::default()
        };
        let s = generate_scenario(seed, &params).unwrap();
        prop_assert!(s.validate().is_ok());
        prop_assert!(s.boxes.len() >= lo && s.boxes.len() <= hi);
        prop_assert_eq!(s.boxes.len(), s.place_poses.len());
        let tasks = task_sequence(&s);
        prop_assert_eq!(tasks.len(), 2 * s.boxes.len());
        for (i, m) in tasks.payload_mask.iter().enumerate() {
            if i % 2 == 0 {
                prop_assert_eq!(*m, 0.0);
            } else {
                prop_assert_eq!(*m, s.boxes[i / 2].mass);
            }
        }
        prop_assert!(inside(&s.conveyor_region, s.pick_pose.x, s.pick_pose.y));
        for p in &s.place_poses {
            prop_assert!(inside(&s.pallet_region, p.x, p.y));
        }
        prop_assert!(!overlaps(&s.conveyor_region, &s.pallet_region));
        prop_assert!(!inside(&s.conveyor_region, 0.0, 0.0) && !inside(&s.pallet_region, 0.0, 0.0));
        if complex {
            prop_assert!((1..=3).contains(&s.obstacles.len()));
            for o in &s.obstacles {
                match o {
                    Obstacle::Disc { center, .. } => prop_assert!(center[0].hypot(center[1]) <= 0.6),
                    Obstacle::Rect { .. } => prop_assert!(false, "pillars are discs"),
                }
            }
        } else {
            prop_assert!(s.obstacles.is_empty());
        }
        // Same seed, same bytes.
        prop_assert_eq!(s.to_json(), generate_scenario(seed, &params).unwrap().to_json());
    }

    #[test]
    fn collision_is_periodic_and_monotone_in_radius(
        q in prop::collection::vec(-PI..PI, 3),
        k in -2i32..=2,
        joint in 0usize..3,
        cx in -1.5f64..1.5,
        cy in -1.5f64..1.5,
        r in 0.01f64..0.4,
        grow in 0.0f64..0.3,
    ) {
        let comp = Composition::serial(&[0.5, 0.4, 0.3], 1.0, 1.0).unwrap();
        let small = Scenario::free_space(vec![Obstacle::Disc { center: [cx, cy], radius: r }]);
        let large = Scenario::free_space(vec![Obstacle::Disc { center: [cx, cy], radius: r + grow }]);
        let mut shifted = q.clone();
        shifted[joint] += f64::from(k) * TAU;
        let b = BoxSpec { size: [0.1, 0.2], mass: 1.0 };
        for carried in [None, Some(&b)] {
            prop_assert_eq!(collides(&comp, &q, &small, carried), collides(&comp, &shifted, &small, carried));
            if collides(&comp, &q, &small, carried) {
                prop_assert!(collides(&comp, &q, &large, carried));
            }
        }
    }
}

#[test]
fn collision_examples() {
    let c = Composition::serial(&[1.0, 1.0], 1.0, 1.0).unwrap();
    let disc = Scenario::free_space(vec![Obstacle::Disc { center: [1.0, 0.0], radius: 0.2 }]);
    assert!(collides(&c, &[0.0, 0.0], &disc, None));
    assert!(!collides(&c, &[PI / 2.0, 0.0], &disc, None));
    assert!(!collides(&c, &[0.0, 0.0], &Scenario::free_space(vec![]), None));
}

#[test]
fn invalid_generator_params_fail() {
    let bad = [
        GeneratorParams { box_count: [0, 2], ..GeneratorParams::default() },
        GeneratorParams { box_count: [2, 5], ..GeneratorParams::default() },
        GeneratorParams { box_mass: [2.0, 1.0], ..GeneratorParams::default() },
    ];
    for p in bad {
        assert!(generate_scenario(1, &p).is_err());
    }
    // Regions that can never fit beside each other give up after bounded attempts.
    let crowded = GeneratorParams {
        conveyor_distance: [0.3, 0.3],
        conveyor_size: [2.0, 2.0],
        pallet_distance: [0.3, 0.3],
        pallet_size: [2.0, 2.0],
        ..GeneratorParams::default()
    };
    assert!(generate_scenario(1, &crowded).is_err());
}

#[test]
fn scenario_json_round_trips() {
    let s = generate_scenario(9, &GeneratorParams::complex()).unwrap();
    let back = Scenario::from_json(&s.to_json()).unwrap();
    assert_eq!(back, s);
    assert!(s.to_json().contains("\"schema\": \"cellforge-scenario/1\""));
    assert!(Scenario::from_json("{\"schema\": \"other/1\"}").is_err());
}
