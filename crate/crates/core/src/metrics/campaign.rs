use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MetricsError, RepeatRecord, SampleRecord};
use crate::model::Composition;
use crate::planners::{plan, PlanOutcome, PlannerConfig, PlannerKind};
use crate::seed::{derive_seed, hash_str};
use crate::traj::{Connector, ConnectorKind};
use crate::world::{generate_scenario, task_sequence, Complexity, GeneratorParams, Scenario, WorldError};

/// One input pair of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: usize,
    pub composition: Composition,
    pub scenario: Scenario,
}

/// Recipe for a campaign population: compositions and complexity classes are
/// cycled over the sample index, scenarios are generated from derived seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub size: usize,
    pub compositions: Vec<Composition>,
    pub complexities: Vec<Complexity>,
    #[serde(default)]
    pub generator: GeneratorParams,
}

pub fn build_population(spec: &PopulationSpec, seed: u64) -> Result<Vec<Sample>, WorldError> {
    if spec.compositions.is_empty() || spec.complexities.is_empty() {
        return Err(WorldError::InvalidParams(
            "population needs at least one composition and one complexity".into(),
        ));
    }
    let tag = hash_str("scenario");
    (0..spec.size)
        .map(|i| {
            let params = GeneratorParams {
                complexity: spec.complexities[i % spec.complexities.len()],
                ..spec.generator.clone()
            };
            Ok(Sample {
                sample_id: i,
                composition: spec.compositions[i % spec.compositions.len()].clone(),
                scenario: generate_scenario(derive_seed(seed, &[tag, i as u64]), &params)?,
            })
        })
        .collect()
}

/// A planner variant and the connector its near-optimal reference runs with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub name: String,
    pub planner: PlannerKind,
    pub connector: Connector,
    pub reference: Connector,
}

impl VariantSpec {
    /// A* with the deterministic connector.
    pub fn astar() -> Self {
        Self {
            name: "astar".into(),
            planner: PlannerKind::Astar,
            connector: Connector::Deterministic,
            reference: Connector::Deterministic,
        }
    }

    /// Greedy with the two-stage stochastic connector.
    pub fn spline() -> Self {
        let c = Connector::with_defaults(ConnectorKind::TwoStage);
        Self {
            name: "spline".into(),
            planner: PlannerKind::Greedy,
            connector: c.clone(),
            reference: c,
        }
    }

    /// Greedy with the budgeted sampling connector.
    pub fn sampler() -> Self {
        Self {
            name: "sampler".into(),
            planner: PlannerKind::Greedy,
            connector: Connector::with_defaults(ConnectorKind::Sampling),
            reference: Connector::with_defaults(ConnectorKind::TwoStage),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "astar" => Some(Self::astar()),
            "spline" => Some(Self::spline()),
            "sampler" => Some(Self::sampler()),
            _ => None,
        }
    }
}

fn run(sample: &Sample, kind: PlannerKind, connector: &Connector, cfg: &PlannerConfig, seed: u64) -> PlanOutcome {
    let tasks = task_sequence(&sample.scenario);
    plan(kind, &sample.composition, &tasks, &sample.scenario, connector, cfg, seed)
}

/// Runs every variant and its reference once per sample. Returns one record
/// list per variant, in sample order.
pub fn run_campaign_single(
    pop: &[Sample],
    variants: &[VariantSpec],
    cfg: &PlannerConfig,
    seed: u64,
) -> Vec<Vec<SampleRecord>> {
    // References shared by several variants run once.
    let mut refs: Vec<&Connector> = Vec::new();
    let ref_of: Vec<usize> = variants
        .iter()
        .map(|v| match refs.iter().position(|r| **r == v.reference) {
            Some(i) => i,
            None => {
                refs.push(&v.reference);
                refs.len() - 1
            }
        })
        .collect();

    let per_sample: Vec<Vec<SampleRecord>> = pop
        .par_iter()
        .map(|sample| {
            let id = sample.sample_id as u64;
            let reference: Vec<PlanOutcome> = refs
                .iter()
                .map(|c| {
                    let tag = hash_str(&format!("reference/{:?}", c.kind()));
                    run(sample, PlannerKind::Dijkstra, c, cfg, derive_seed(seed, &[tag, id]))
                })
                .collect();
            variants
                .iter()
                .zip(&ref_of)
                .map(|(v, &ri)| {
                    let out = run(sample, v.planner, &v.connector, cfg, derive_seed(seed, &[hash_str(&v.name), id]));
                    SampleRecord {
                        sample_id: sample.sample_id,
                        x_ref: sample.composition.id(),
                        theta_ref: sample.scenario.seed,
                        n_q: sample.composition.n_q(),
                        complexity: sample.scenario.complexity,
                        g_star: reference[ri].cost,
                        t_star: reference[ri].stats.wall_time,
                        g_hat: out.cost,
                        t_hat: out.stats.wall_time,
                    }
                })
                .collect()
        })
        .collect();

    (0..variants.len())
        .map(|vi| per_sample.iter().map(|recs| recs[vi].clone()).collect())
        .collect()
}

/// Runs `variant` `k` times per sample with seeds derived from
/// `(seed, variant, sample, repeat)`.
pub fn run_campaign_repeat(
    pop: &[Sample],
    variant: &VariantSpec,
    k: usize,
    cfg: &PlannerConfig,
    seed: u64,
) -> Result<Vec<RepeatRecord>, MetricsError> {
    if k < 2 {
        return Err(MetricsError::InvalidInput(format!(
            "need at least two repeats, got {k}"
        )));
    }
    let tag = hash_str(&variant.name);
    Ok(pop
        .par_iter()
        .map(|sample| RepeatRecord {
            sample_id: sample.sample_id,
            outputs: (0..k)
                .map(|r| {
                    let s = derive_seed(seed, &[tag, sample.sample_id as u64, r as u64]);
                    run(sample, variant.planner, &variant.connector, cfg, s).cost
                })
                .collect(),
        })
        .collect())
}
