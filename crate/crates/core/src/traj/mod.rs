//! Joint-space trajectories, time parameterization, violation counting and the
//! three edge connectors used by the planners.

mod profile;
mod sampling;
mod spline;
mod stochastic;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{Composition, JointConfig, UnwrappedTarget};
use crate::numeric::inf_as_null;
use crate::seed::rng_from;
use crate::world::{collides, BoxSpec, Scenario};

pub use profile::{joint_trapezoid_time, trapezoid_duration, SyncMotion};
pub use sampling::{sampling_connect, SamplingConfig};
pub use spline::SplineMotion;
pub use stochastic::{optimize_edge_stochastic, two_stage_connect, CemBudget, TwoStageBudget};

/// Slack applied to the velocity and acceleration checks.
pub const LIMIT_SLACK: f64 = 1e-9;

/// Sampling step used when counting violations along a trajectory of length `duration`.
pub fn violation_step(duration: f64) -> f64 {
    (duration / 200.0).max(1e-3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Trapezoid(SyncMotion),
    Spline(SplineMotion),
}

impl Segment {
    fn duration(&self) -> f64 {
        match self {
            Segment::Trapezoid(m) => m.duration(),
            Segment::Spline(m) => m.duration(),
        }
    }

    fn eval_into(&self, tau: f64, q: &mut [f64], qd: &mut [f64], qdd: &mut [f64]) {
        match self {
            Segment::Trapezoid(m) => m.eval_into(tau, q, qd, qdd),
            Segment::Spline(m) => m.eval_into(tau, q, qd, qdd),
        }
    }
}

/// Joint state at one instant, in unwrapped joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
}

/// Piecewise timed motion; consecutive segments meet at rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    n_q: usize,
    segments: Vec<Segment>,
    starts: Vec<f64>,
    duration: f64,
}

impl Trajectory {
    fn from_segments(n_q: usize, segments: Vec<Segment>) -> Self {
        let mut starts = Vec::with_capacity(segments.len());
        let mut t = 0.0;
        for s in &segments {
            starts.push(t);
            t += s.duration();
        }
        Self {
            n_q,
            segments,
            starts,
            duration: t,
        }
    }

    pub fn from_motion(m: SyncMotion) -> Self {
        Self::from_segments(m.start().len(), vec![Segment::Trapezoid(m)])
    }

    pub fn from_spline(m: SplineMotion) -> Self {
        let n_q = m.start().len();
        Self::from_segments(n_q, vec![Segment::Spline(m)])
    }

    /// Rest-to-rest synchronized trapezoid between consecutive waypoints.
    pub fn through_waypoints(points: &[Vec<f64>], v_max: &[f64], a_max: &[f64]) -> Self {
        assert!(!points.is_empty(), "need at least one waypoint");
        if points.len() == 1 {
            return Self::from_motion(SyncMotion::new(&points[0], &points[0], v_max, a_max));
        }
        let segs = points
            .windows(2)
            .map(|w| Segment::Trapezoid(SyncMotion::new(&w[0], &w[1], v_max, a_max)))
            .collect();
        Self::from_segments(points[0].len(), segs)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn evaluate(&self, t: f64) -> TrajectoryState {
        let mut st = TrajectoryState {
            t,
            q: vec![0.0; self.n_q],
            qd: vec![0.0; self.n_q],
            qdd: vec![0.0; self.n_q],
        };
        self.eval_into(t, &mut st.q, &mut st.qd, &mut st.qdd);
        st
    }

    fn eval_into(&self, t: f64, q: &mut [f64], qd: &mut [f64], qdd: &mut [f64]) {
        let t = t.clamp(0.0, self.duration);
        let k = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        self.segments[k].eval_into(t - self.starts[k], q, qd, qdd);
    }

    pub fn start(&self) -> Vec<f64> {
        self.evaluate(0.0).q
    }

    pub fn end(&self) -> Vec<f64> {
        self.evaluate(self.duration).q
    }

    /// Sample times `0, dt, 2dt, ...` with the final instant always included.
    pub fn sample_times(&self, dt: f64) -> Vec<f64> {
        assert!(dt > 0.0, "sampling step must be positive");
        let n = (self.duration / dt).floor() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * dt).filter(|&t| t < self.duration).collect();
        ts.push(self.duration);
        ts
    }

    pub fn samples(&self, dt: f64) -> Vec<TrajectoryState> {
        self.sample_times(dt).into_iter().map(|t| self.evaluate(t)).collect()
    }
}

/// Number of samples where the arm collides or a joint exceeds its limits.
pub fn count_violations(
    traj: &Trajectory,
    comp: &Composition,
    s: &Scenario,
    payload: Option<&BoxSpec>,
    dt: f64,
) -> usize {
    let n = traj.n_q();
    let (mut q, mut qd, mut qdd) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let joints = comp.joints();
    traj.sample_times(dt)
        .into_iter()
        .filter(|&t| {
            traj.eval_into(t, &mut q, &mut qd, &mut qdd);
            let over = joints.iter().enumerate().any(|(i, j)| {
                qd[i].abs() > j.v_max + LIMIT_SLACK || qdd[i].abs() > j.a_max + LIMIT_SLACK
            });
            over || collides(comp, &q, s, payload)
        })
        .count()
}

/// Outcome of connecting two joint states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeResult {
    pub feasible: bool,
    /// Duration in seconds, infinite when infeasible.
    #[serde(with = "inf_as_null")]
    pub cost: f64,
    pub trajectory: Option<Trajectory>,
    pub n_c: usize,
    pub wall_time: f64,
}

impl EdgeResult {
    /// Scores `traj` by its violation count.
    pub(crate) fn checked(
        traj: Trajectory,
        comp: &Composition,
        s: &Scenario,
        payload: Option<&BoxSpec>,
        started: Instant,
    ) -> Self {
        let n_c = count_violations(&traj, comp, s, payload, violation_step(traj.duration()));
        Self::with_count(traj, n_c, started)
    }

    pub(crate) fn with_count(traj: Trajectory, n_c: usize, started: Instant) -> Self {
        let feasible = n_c == 0;
        Self {
            feasible,
            cost: if feasible { traj.duration() } else { f64::INFINITY },
            trajectory: Some(traj),
            n_c,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }
}

/// Straight rest-to-rest motion with synchronized trapezoid timing.
pub fn evaluate_edge_deterministic(
    comp: &Composition,
    q_s: &JointConfig,
    target: &UnwrappedTarget,
    s: &Scenario,
    payload: Option<&BoxSpec>,
) -> EdgeResult {
    let started = Instant::now();
    debug_assert_eq!(q_s, &target.origin);
    let motion = SyncMotion::new(q_s.as_slice(), &target.q_abs, &comp.v_max(), &comp.a_max());
    EdgeResult::checked(Trajectory::from_motion(motion), comp, s, payload, started)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectorKind {
    Deterministic,
    TwoStage,
    Sampling,
}

impl ConnectorKind {
    pub fn is_stochastic(self) -> bool {
        self != ConnectorKind::Deterministic
    }
}

/// An edge connector together with its budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Connector {
    Deterministic,
    TwoStage(TwoStageBudget),
    Sampling(SamplingConfig),
}

impl Connector {
    pub fn with_defaults(kind: ConnectorKind) -> Self {
        match kind {
            ConnectorKind::Deterministic => Connector::Deterministic,
            ConnectorKind::TwoStage => Connector::TwoStage(TwoStageBudget::default()),
            ConnectorKind::Sampling => Connector::Sampling(SamplingConfig::default()),
        }
    }

    pub fn kind(&self) -> ConnectorKind {
        match self {
            Connector::Deterministic => ConnectorKind::Deterministic,
            Connector::TwoStage(_) => ConnectorKind::TwoStage,
            Connector::Sampling(_) => ConnectorKind::Sampling,
        }
    }

    /// Runs the connector; stochastic connectors draw from a stream seeded by `seed`.
    pub fn connect(
        &self,
        comp: &Composition,
        q_s: &JointConfig,
        target: &UnwrappedTarget,
        s: &Scenario,
        payload: Option<&BoxSpec>,
        seed: u64,
    ) -> EdgeResult {
        match self {
            Connector::Deterministic => evaluate_edge_deterministic(comp, q_s, target, s, payload),
            Connector::TwoStage(b) => two_stage_connect(comp, q_s, target, s, payload, b, &mut rng_from(seed)),
            Connector::Sampling(c) => sampling_connect(comp, q_s, target, s, payload, c, &mut rng_from(seed)),
        }
    }
}
