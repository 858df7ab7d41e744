//! Bilevel work-cell optimization over planar modular serial arms.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: module specs, compositions, kinematics, numerical IK, static torques.
//! - [`world`]: palletization scenarios, the seeded generator and collision checks.
//! - [`traj`]: trajectories, time parameterization and the three edge connectors.
//! - [`planners`]: the layered IK graph, Dijkstra / A* search and the greedy variants.
//! - [`metrics`]: optimality, time gain, robustness and consistency estimators plus
//!   the campaign runners that produce their inputs.
//! - [`bilevel`]: composition enumeration and hierarchical elimination.
//!
//! Every stochastic component takes an explicit seed; [`seed::derive_seed`] fans a
//! single master seed out to independent streams.

pub mod bilevel;
pub mod metrics;
pub mod model;
pub mod planners;
pub mod seed;
pub mod traj;
pub mod world;

mod numeric;

pub use bilevel::{EliminationTrace, ModuleLibrary, PlannerChoice};
pub use metrics::{MetricsReport, RepeatRecord, SampleRecord};
pub use model::{Composition, IkConfig, JointConfig, ModuleSpec, Pose2, UnwrappedTarget};
pub use planners::{PlanOutcome, PlannerKind};
pub use traj::{Connector, ConnectorKind, EdgeResult, Trajectory};
pub use world::{GeneratorParams, Scenario, TaskSequence};
