//! Composition search by hierarchical elimination: enumerate, drop candidates
//! through increasingly expensive filters, evaluate survivors at motion level.

mod enumerate;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{inverse_kinematics, static_payload_torques, Composition, IkConfig, ModelError, ModuleSpec};
use crate::numeric::inf_as_null;
use crate::planners::{plan, PlanOutcome, PlannerConfig, PlannerKind};
use crate::seed::{derive_seed, hash_str};
use crate::traj::{Connector, SamplingConfig, TwoStageBudget};
use crate::world::{collides, task_sequence, Scenario, TaskSequence};

pub use enumerate::Compositions;

#[derive(Debug, Error)]
pub enum BilevelError {
    #[error("invalid module library: {0}")]
    InvalidLibrary(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Available modules and assembly limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleLibrary {
    pub joint_specs: Vec<ModuleSpec>,
    pub link_specs: Vec<ModuleSpec>,
    pub max_modules: usize,
    pub max_motors: usize,
    #[serde(default = "one")]
    pub min_motors: usize,
}

fn one() -> usize {
    1
}

impl ModuleLibrary {
    pub fn validate(&self) -> Result<(), BilevelError> {
        let bad = |m: String| Err(BilevelError::InvalidLibrary(m));
        if self.joint_specs.is_empty() && self.link_specs.is_empty() {
            return bad("library has no modules".into());
        }
        if self.max_motors > self.max_modules {
            return bad(format!(
                "max_motors {} exceeds max_modules {}",
                self.max_motors, self.max_modules
            ));
        }
        if self.min_motors < 1 {
            return bad("min_motors must be at least 1".into());
        }
        for m in self.joint_specs.iter().chain(&self.link_specs) {
            m.validate()?;
        }
        if let Some(m) = self.joint_specs.iter().find(|m| !m.is_joint()) {
            return bad(format!("'{}' listed as a joint", m.id));
        }
        if let Some(m) = self.link_specs.iter().find(|m| m.is_joint()) {
            return bad(format!("'{}' listed as a link", m.id));
        }
        let mut ids: Vec<&str> = self.joint_specs.iter().chain(&self.link_specs).map(|m| m.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("duplicate module id '{}'", w[0]));
        }
        Ok(())
    }

    /// Every module, joints first.
    pub fn modules(&self) -> Vec<ModuleSpec> {
        self.joint_specs.iter().chain(&self.link_specs).cloned().collect()
    }
}

/// Ordered stream of all grammar-valid compositions of the library.
pub fn enumerate_compositions(lib: &ModuleLibrary) -> Compositions<'_> {
    Compositions::new(lib)
}

pub fn filter_min_motors(c: &Composition, min_motors: usize) -> bool {
    c.n_q() >= min_motors
}

/// Keeps `c` when every task pose has a collision-free IK solution. Poses out
/// of reach of the summed link lengths are rejected without IK.
pub fn filter_reach(c: &Composition, tasks: &TaskSequence, s: &Scenario, ik: &IkConfig) -> bool {
    let far = tasks.poses.iter().map(|p| p.distance_from_origin()).fold(0.0, f64::max);
    if c.total_length() < far {
        return false;
    }
    tasks.poses.iter().zip(&tasks.carried).all(|(p, carried)| {
        inverse_kinematics(c, p, ik)
            .iter()
            .any(|q| !collides(c, q.as_slice(), s, carried.as_ref()))
    })
}

/// Keeps `c` when at every place pose some collision-free IK solution holds
/// the box within every joint's torque limit.
pub fn filter_payload(c: &Composition, tasks: &TaskSequence, s: &Scenario, ik: &IkConfig) -> bool {
    tasks
        .poses
        .iter()
        .zip(&tasks.carried)
        .filter_map(|(p, b)| b.as_ref().map(|b| (p, b)))
        .all(|(p, b)| {
            inverse_kinematics(c, p, ik).iter().any(|q| {
                !collides(c, q.as_slice(), s, Some(b))
                    && static_payload_torques(c, q.as_slice(), b.mass)
                        .expect("IK returns full configurations")
                        .iter()
                        .zip(c.joints())
                        .all(|(t, j)| *t <= j.tau_max)
            })
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerChoice {
    NearOptimal,
    Astar,
    GreedySpline,
    GreedySampler,
}

impl PlannerChoice {
    pub fn planner(self) -> PlannerKind {
        match self {
            PlannerChoice::NearOptimal => PlannerKind::Dijkstra,
            PlannerChoice::Astar => PlannerKind::Astar,
            PlannerChoice::GreedySpline | PlannerChoice::GreedySampler => PlannerKind::Greedy,
        }
    }

    pub fn connector(self, cfg: &BilevelConfig) -> Connector {
        match self {
            PlannerChoice::NearOptimal | PlannerChoice::Astar => Connector::Deterministic,
            PlannerChoice::GreedySpline => Connector::TwoStage(cfg.two_stage),
            PlannerChoice::GreedySampler => Connector::Sampling(cfg.sampling),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilevelConfig {
    pub planner: PlannerConfig,
    pub two_stage: TwoStageBudget,
    pub sampling: SamplingConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fate {
    MinMotors,
    Reach,
    Payload,
    Evaluated,
}

/// What happened to one enumerated composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionFate {
    pub index: usize,
    pub id: String,
    pub fate: Fate,
    #[serde(with = "inf_as_null")]
    pub cost: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestComposition {
    pub index: usize,
    pub composition: Composition,
    #[serde(with = "inf_as_null")]
    pub cost: f64,
    pub outcome: PlanOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationTrace {
    pub generated: usize,
    pub after_min_motors: usize,
    pub after_reach: usize,
    pub after_payload: usize,
    pub evaluated: usize,
    pub feasible: usize,
    pub best: Option<BestComposition>,
    pub fates: Vec<CompositionFate>,
}

/// Seed of one composition's motion-level run.
pub fn composition_seed(seed: u64, c: &Composition) -> u64 {
    derive_seed(seed, &[hash_str(&c.id())])
}

/// Filters every enumerated composition, evaluates the survivors in parallel
/// and returns the cheapest; ties go to the earlier enumerated composition.
pub fn optimize_composition(
    s: &Scenario,
    lib: &ModuleLibrary,
    choice: PlannerChoice,
    cfg: &BilevelConfig,
    seed: u64,
) -> Result<EliminationTrace, BilevelError> {
    lib.validate()?;
    let tasks = task_sequence(s);
    let ik = &cfg.planner.ik;
    let candidates: Vec<Composition> = enumerate_compositions(lib).collect();
    let generated = candidates.len();

    let screened: Vec<Option<Fate>> = candidates
        .par_iter()
        .map(|c| {
            if !filter_min_motors(c, lib.min_motors) {
                Some(Fate::MinMotors)
            } else if !filter_reach(c, &tasks, s, ik) {
                Some(Fate::Reach)
            } else if !filter_payload(c, &tasks, s, ik) {
                Some(Fate::Payload)
            } else {
                None
            }
        })
        .collect();
    let count = |f: Fate| screened.iter().filter(|x| **x == Some(f)).count();
    let after_min_motors = generated - count(Fate::MinMotors);
    let after_reach = after_min_motors - count(Fate::Reach);
    let after_payload = after_reach - count(Fate::Payload);

    let survivors: Vec<usize> = (0..generated).filter(|&i| screened[i].is_none()).collect();
    let (kind, connector) = (choice.planner(), choice.connector(cfg));
    let outcomes: Vec<(usize, PlanOutcome, f64)> = survivors
        .par_iter()
        .map(|&i| {
            let started = Instant::now();
            let c = &candidates[i];
            let out = plan(kind, c, &tasks, s, &connector, &cfg.planner, composition_seed(seed, c));
            (i, out, started.elapsed().as_secs_f64())
        })
        .collect();

    let mut fates: Vec<CompositionFate> = candidates
        .iter()
        .zip(&screened)
        .enumerate()
        .map(|(index, (c, f))| CompositionFate {
            index,
            id: c.id(),
            fate: f.unwrap_or(Fate::Evaluated),
            cost: f64::INFINITY,
            wall_time: 0.0,
        })
        .collect();
    let mut best: Option<(usize, &PlanOutcome)> = None;
    for (i, out, wall) in &outcomes {
        fates[*i].cost = out.cost;
        fates[*i].wall_time = *wall;
        if out.is_feasible() && best.is_none_or(|(_, b)| out.cost < b.cost) {
            best = Some((*i, out));
        }
    }
    Ok(EliminationTrace {
        generated,
        after_min_motors,
        after_reach,
        after_payload,
        evaluated: outcomes.len(),
        feasible: outcomes.iter().filter(|o| o.1.is_feasible()).count(),
        best: best.map(|(i, out)| BestComposition {
            index: i,
            composition: candidates[i].clone(),
            cost: out.cost,
            outcome: out.clone(),
        }),
        fates,
    })
}
