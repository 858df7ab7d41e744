use serde::{Deserialize, Serialize};

use crate::model::{inverse_kinematics, static_payload_torques, Composition, IkConfig, JointConfig};
use crate::world::{collides, BoxSpec, Scenario, TaskSequence};

/// Layered graph: layer `i` holds the admissible IK solutions of task pose `i`
/// and every node is linked to every node of the next layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionGraph {
    layers: Vec<Vec<JointConfig>>,
    /// Box held while moving into each layer.
    carried: Vec<Option<BoxSpec>>,
}

impl MotionGraph {
    /// Graph over explicit layers; `carried[i]` is the box held on edges into layer `i`.
    pub fn from_layers(layers: Vec<Vec<JointConfig>>, carried: Vec<Option<BoxSpec>>) -> Self {
        assert_eq!(layers.len(), carried.len(), "one carried entry per layer");
        Self { layers, carried }
    }

    /// Unloaded graph.
    pub fn unloaded(layers: Vec<Vec<JointConfig>>) -> Self {
        let n = layers.len();
        Self::from_layers(layers, vec![None; n])
    }

    pub fn layers(&self) -> &[Vec<JointConfig>] {
        &self.layers
    }

    pub fn carried(&self, layer: usize) -> Option<&BoxSpec> {
        self.carried[layer].as_ref()
    }

    pub fn n_nodes(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn n_edges(&self) -> usize {
        self.layers.windows(2).map(|w| w[0].len() * w[1].len()).sum()
    }

    /// False when some task pose has no admissible configuration.
    pub fn is_feasible(&self) -> bool {
        !self.layers.is_empty() && self.layers.iter().all(|l| !l.is_empty())
    }
}

/// Solves IK for every task pose and keeps the configurations that are
/// collision-free with the carried box and within the static torque limits
/// for that pose's payload.
pub fn build_graph(comp: &Composition, tasks: &TaskSequence, s: &Scenario, ik: &IkConfig) -> MotionGraph {
    assert!(!tasks.is_empty(), "need at least one task pose");
    let layers = tasks
        .poses
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            let carried = tasks.carried[i].as_ref();
            inverse_kinematics(comp, pose, ik)
                .into_iter()
                .filter(|q| admissible(comp, q, s, carried, tasks.payload_mask[i]))
                .collect()
        })
        .collect();
    MotionGraph::from_layers(layers, tasks.carried.clone())
}

pub(crate) fn admissible(
    comp: &Composition,
    q: &JointConfig,
    s: &Scenario,
    carried: Option<&BoxSpec>,
    payload_mass: f64,
) -> bool {
    if collides(comp, q.as_slice(), s, carried) {
        return false;
    }
    let tau = static_payload_torques(comp, q.as_slice(), payload_mass).expect("dimension checked by IK");
    tau.iter().zip(comp.joints()).all(|(t, j)| *t <= j.tau_max)
}
