//! Palletization scenarios: data model, seeded generator and collision checks.
//!
//! The world is planar with the robot base at the origin. Conveyor and pallet
//! are keep-out rectangles whose near edges carry the task poses; obstacles are
//! discs (pillars) or axis-aligned rectangles.

mod generator;
pub(crate) mod geometry;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::kinematics::{any_segment, fk_unchecked};
use crate::model::{Composition, Pose2};
use geometry::{point_rect_distance, point_segment_distance, segment_hits_rect, segment_rect_distance, OrientedRect};

pub use generator::{generate_scenario, GeneratorParams};

pub const SCENARIO_SCHEMA: &str = "cellforge-scenario/1";
pub const MAX_BOXES: usize = 4;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("could not place {what} after {attempts} attempts")]
    PlacementFailed { what: &'static str, attempts: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("scenario json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.iter().chain(&self.max).all(|v| v.is_finite())
            && self.min[0] < self.max[0]
            && self.min[1] < self.max[1]
    }

    /// Closed-set membership with an absolute tolerance.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        point_rect_distance(p, self.min, self.max) <= tol
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.min[0] <= other.max[0]
            && other.min[0] <= self.max[0]
            && self.min[1] <= other.max[1]
            && other.min[1] <= self.max[1]
    }

    fn shrunk(&self, by: f64) -> Rect {
        Rect {
            min: [self.min[0] + by, self.min[1] + by],
            max: [self.max[0] - by, self.max[1] - by],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Obstacle {
    Disc { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
}

impl Obstacle {
    pub fn is_valid(&self) -> bool {
        match *self {
            Obstacle::Disc { center, radius } => {
                center.iter().all(|v| v.is_finite()) && radius.is_finite() && radius > 0.0
            }
            Obstacle::Rect { min, max } => Rect::new(min, max).is_valid(),
        }
    }

    fn segment_clearance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        match *self {
            Obstacle::Disc { center, radius } => point_segment_distance(center, a, b) - radius,
            Obstacle::Rect { min, max } => segment_rect_distance(a, b, min, max),
        }
    }

    fn point_clearance(&self, p: [f64; 2]) -> f64 {
        self.segment_clearance(p, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Complexity {
    Simple,
    Complex,
}

/// A box to palletize: footprint `size` (along the tool axis, across it) and mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub size: [f64; 2],
    pub mass: f64,
}

fn default_link_radius() -> f64 {
    0.05
}

fn default_region_tolerance() -> f64 {
    1e-3
}

fn default_base_clearance() -> f64 {
    0.2
}

/// The fixed parameters of one palletization task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: String,
    pub seed: u64,
    pub complexity: Complexity,
    /// Clearance radius of every link capsule.
    #[serde(default = "default_link_radius")]
    pub link_radius: f64,
    /// Region interiors are shrunk by this much before the link test, so a
    /// tool tip resting on a region edge is not a contact.
    #[serde(default = "default_region_tolerance")]
    pub region_tolerance: f64,
    #[serde(default = "default_base_clearance")]
    pub base_clearance: f64,
    pub obstacles: Vec<Obstacle>,
    pub conveyor_region: Rect,
    pub pallet_region: Rect,
    pub boxes: Vec<BoxSpec>,
    pub pick_pose: Pose2,
    pub place_poses: Vec<Pose2>,
}

impl Scenario {
    /// An empty world with the given regions and task poses; used for
    /// hand-built test scenes.
    pub fn open_world(conveyor: Rect, pallet: Rect, pick: Pose2, places: Vec<Pose2>, boxes: Vec<BoxSpec>) -> Self {
        Self {
            schema: SCENARIO_SCHEMA.to_string(),
            seed: 0,
            complexity: Complexity::Simple,
            link_radius: default_link_radius(),
            region_tolerance: default_region_tolerance(),
            base_clearance: default_base_clearance(),
            obstacles: Vec::new(),
            conveyor_region: conveyor,
            pallet_region: pallet,
            boxes,
            pick_pose: pick,
            place_poses: places,
        }
    }

    /// A scenario without regions or task poses, only the listed obstacles.
    /// Collision queries work on it; `task_sequence` does not.
    pub fn free_space(obstacles: Vec<Obstacle>) -> Self {
        let far = Rect::new([1e6, 1e6], [1e6 + 1.0, 1e6 + 1.0]);
        let far2 = Rect::new([-1e6 - 1.0, 1e6], [-1e6, 1e6 + 1.0]);
        let mut s = Self::open_world(far, far2, Pose2::new(1e6, 1e6, 0.0), Vec::new(), Vec::new());
        s.obstacles = obstacles;
        s
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidScenario(m));
        if self.schema != SCENARIO_SCHEMA {
            return bad(format!("unsupported schema `{}`", self.schema));
        }
        if !(self.link_radius >= 0.0 && self.region_tolerance >= 0.0 && self.base_clearance >= 0.0) {
            return bad("clearances must be non-negative".into());
        }
        if self.boxes.is_empty() || self.boxes.len() > MAX_BOXES {
            return bad(format!("box count {} outside 1..={MAX_BOXES}", self.boxes.len()));
        }
        if self.boxes.len() != self.place_poses.len() {
            return bad("one place pose per box required".into());
        }
        if self
            .boxes
            .iter()
            .any(|b| !(b.mass >= 0.0 && b.size[0] > 0.0 && b.size[1] > 0.0))
        {
            return bad("box sizes must be positive and masses non-negative".into());
        }
        if !self.conveyor_region.is_valid() || !self.pallet_region.is_valid() {
            return bad("degenerate region".into());
        }
        if self.conveyor_region.overlaps(&self.pallet_region) {
            return bad("conveyor and pallet overlap".into());
        }
        for (name, r) in [("conveyor", &self.conveyor_region), ("pallet", &self.pallet_region)] {
            if point_rect_distance([0.0, 0.0], r.min, r.max) <= self.base_clearance {
                return bad(format!("{name} overlaps the base"));
            }
        }
        if let Some(o) = self.obstacles.iter().find(|o| !o.is_valid()) {
            return bad(format!("invalid obstacle {o:?}"));
        }
        let tol = 1e-9;
        if !self.conveyor_region.contains([self.pick_pose.x, self.pick_pose.y], tol) {
            return bad("pick pose outside the conveyor region".into());
        }
        if self
            .place_poses
            .iter()
            .any(|p| !self.pallet_region.contains([p.x, p.y], tol))
        {
            return bad("place pose outside the pallet region".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, WorldError> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }
}

/// Ordered task poses with the box carried while moving into each pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSequence {
    pub poses: Vec<Pose2>,
    /// Carried mass on arrival at each pose (zero on pick poses).
    pub payload_mask: Vec<f64>,
    pub carried: Vec<Option<BoxSpec>>,
}

impl TaskSequence {
    /// Arbitrary pose list; `carried[i]` is the box held on the way into pose `i`.
    pub fn custom(poses: Vec<Pose2>, carried: Vec<Option<BoxSpec>>) -> Self {
        assert_eq!(poses.len(), carried.len(), "one carried entry per pose");
        let payload_mask = carried.iter().map(|b| b.map_or(0.0, |b| b.mass)).collect();
        Self {
            poses,
            payload_mask,
            carried,
        }
    }

    pub fn unloaded(poses: Vec<Pose2>) -> Self {
        let n = poses.len();
        Self::custom(poses, vec![None; n])
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Interleaves `[pick, place_1, pick, place_2, ...]`.
pub fn task_sequence(s: &Scenario) -> TaskSequence {
    let mut poses = Vec::with_capacity(2 * s.boxes.len());
    let mut carried = Vec::with_capacity(2 * s.boxes.len());
    for (b, place) in s.boxes.iter().zip(&s.place_poses) {
        poses.push(s.pick_pose);
        carried.push(None);
        poses.push(*place);
        carried.push(Some(*b));
    }
    TaskSequence::custom(poses, carried)
}

/// True when a link capsule or the carried box touches an obstacle, or a link
/// enters the interior of the conveyor or pallet region.
pub fn collides(comp: &Composition, q: &[f64], s: &Scenario, carried: Option<&BoxSpec>) -> bool {
    let regions = [
        s.conveyor_region.shrunk(s.region_tolerance),
        s.pallet_region.shrunk(s.region_tolerance),
    ];
    let hit = any_segment(comp, q, |a, b, _| {
        s.obstacles
            .iter()
            .any(|o| o.segment_clearance(a, b) <= s.link_radius)
            || regions
                .iter()
                .any(|r| r.is_valid() && segment_hits_rect(a, b, r.min, r.max))
    });
    if hit {
        return true;
    }
    let Some(b) = carried else {
        return false;
    };
    let (x, y, theta) = fk_unchecked(comp, q);
    let footprint = OrientedRect {
        center: [x, y],
        half: [0.5 * b.size[0], 0.5 * b.size[1]],
        angle: theta,
    };
    s.obstacles.iter().any(|o| match *o {
        Obstacle::Disc { center, radius } => footprint.disc_distance(center, radius) <= 0.0,
        Obstacle::Rect { min, max } => footprint.intersects_aabb(min, max),
    })
}

/// Smallest clearance of a point to any obstacle.
pub(crate) fn obstacle_clearance(s: &Scenario, p: [f64; 2]) -> f64 {
    s.obstacles
        .iter()
        .map(|o| o.point_clearance(p))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, TAU};

    use super::*;

    fn two_link() -> Composition {
        Composition::serial(&[1.0, 1.0], 1.0, 1.0).unwrap()
    }

    fn disc(x: f64, y: f64, r: f64) -> Obstacle {
        Obstacle::Disc {
            center: [x, y],
            radius: r,
        }
    }

    #[test]
    fn collision_examples() {
        let c = two_link();
        let s = Scenario::free_space(vec![disc(1.0, 0.0, 0.2)]);
        assert!(collides(&c, &[0.0, 0.0], &s, None));
        assert!(!collides(&c, &[FRAC_PI_2, 0.0], &s, None));
        assert!(!collides(&c, &[0.0, 0.0], &Scenario::free_space(vec![]), None));
    }

    #[test]
    fn region_interior_blocks_links_but_edge_contact_does_not() {
        let c = two_link();
        let conveyor = Rect::new([2.0, -0.5], [2.5, 0.5]);
        let pallet = Rect::new([-0.5, 1.5], [0.5, 2.5]);
        let s = Scenario::open_world(
            conveyor,
            pallet,
            Pose2::new(2.0, 0.0, 0.0),
            vec![Pose2::new(0.0, 1.5, FRAC_PI_2)],
            vec![BoxSpec { size: [0.2, 0.2], mass: 1.0 }],
        );
        s.validate().unwrap();
        // Tip rests on the conveyor's near edge.
        assert!(!collides(&c, &[0.0, 0.0], &s, None));
        // Pointing straight up the arm crosses into the pallet.
        assert!(collides(&c, &[FRAC_PI_2, 0.0], &s, None));
    }

    #[test]
    fn carried_box_collides_with_obstacles() {
        let c = two_link();
        let s = Scenario::free_space(vec![disc(2.2, 0.0, 0.05)]);
        let b = BoxSpec { size: [0.6, 0.2], mass: 1.0 };
        assert!(!collides(&c, &[0.0, 0.0], &s, None));
        assert!(collides(&c, &[0.0, 0.0], &s, Some(&b)));
        let walls = Scenario::free_space(vec![Obstacle::Rect { min: [1.9, 0.15], max: [2.1, 0.4] }]);
        assert!(!collides(&c, &[0.0, 0.0], &walls, None));
        let tall = BoxSpec { size: [0.1, 0.5], mass: 1.0 };
        assert!(collides(&c, &[0.0, 0.0], &walls, Some(&tall)));
    }

    #[test]
    fn rect_obstacle_uses_capsule_radius() {
        let c = two_link();
        let wall = |gap: f64| Scenario::free_space(vec![Obstacle::Rect { min: [0.0, gap], max: [2.0, 1.0] }]);
        assert!(collides(&c, &[0.0, 0.0], &wall(0.04), None));
        assert!(!collides(&c, &[0.0, 0.0], &wall(0.06), None));
    }

    #[test]
    fn task_sequence_interleaves_pick_and_place() {
        let b = |m| BoxSpec { size: [0.2, 0.2], mass: m };
        let s = Scenario::open_world(
            Rect::new([1.0, -0.2], [1.3, 0.2]),
            Rect::new([-0.2, 1.0], [0.2, 1.3]),
            Pose2::new(1.0, 0.0, 0.0),
            vec![Pose2::new(0.0, 1.0, FRAC_PI_2); 4],
            vec![b(1.0), b(2.0), b(3.0), b(4.0)],
        );
        let t = task_sequence(&s);
        assert_eq!(t.len(), 8);
        assert_eq!(t.payload_mask, vec![0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0]);
        let mut one = s.clone();
        one.boxes.truncate(1);
        one.place_poses.truncate(1);
        let t = task_sequence(&one);
        assert_eq!(t.poses, vec![one.pick_pose, one.place_poses[0]]);
        assert_eq!(t.payload_mask, vec![0.0, 1.0]);
        let mut none = s.clone();
        none.boxes.clear();
        none.place_poses.clear();
        assert!(none.validate().is_err());
    }

    #[test]
    fn collision_is_periodic_in_joint_angles() {
        let c = two_link();
        let s = Scenario::free_space(vec![disc(0.7, 0.7, 0.1), disc(-1.2, 0.3, 0.2)]);
        for k in 0..50 {
            let q = [0.13 * k as f64, -0.29 * k as f64];
            let shifted = [q[0] + TAU, q[1] - TAU];
            assert_eq!(collides(&c, &q, &s, None), collides(&c, &shifted, &s, None));
        }
    }
}
