//! Planar modular serial arm: module specs, compositions and joint-space types.
//!
//! A composition is an ordered list of joint and link modules starting at the
//! base. Every joint rotates about the plane normal; the links that follow a
//! joint (until the next joint) form that joint's distal segment.

mod ik;
pub(crate) mod kinematics;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{wrap_angle, TAU};

pub use ik::{inverse_kinematics, IkConfig};
pub use kinematics::{
    forward_kinematics, jacobian, joint_positions, static_payload_torques, GRAVITY,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected {expected} joint values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite joint value at index {0}")]
    NonFinite(usize),
    #[error("invalid module `{id}`: {reason}")]
    InvalidModule { id: String, reason: String },
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("unknown module id `{0}`")]
    UnknownModule(String),
}

/// Physical parameters of a module, tagged by kind in the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModuleKind {
    Joint {
        v_max: f64,
        a_max: f64,
        tau_max: f64,
        #[serde(default)]
        mass: f64,
    },
    Link {
        length: f64,
        #[serde(default)]
        mass: f64,
    },
}

/// One entry of a module library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: ModuleKind,
}

impl ModuleSpec {
    pub fn joint(id: impl Into<String>, v_max: f64, a_max: f64, tau_max: f64, mass: f64) -> Self {
        Self {
            id: id.into(),
            kind: ModuleKind::Joint {
                v_max,
                a_max,
                tau_max,
                mass,
            },
        }
    }

    pub fn link(id: impl Into<String>, length: f64, mass: f64) -> Self {
        Self {
            id: id.into(),
            kind: ModuleKind::Link { length, mass },
        }
    }

    pub fn is_joint(&self) -> bool {
        matches!(self.kind, ModuleKind::Joint { .. })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::InvalidModule {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(bad("empty id"));
        }
        match self.kind {
            ModuleKind::Joint {
                v_max,
                a_max,
                tau_max,
                mass,
            } => {
                if ![v_max, a_max, tau_max, mass].iter().all(|v| v.is_finite()) {
                    return Err(bad("non-finite field"));
                }
                if v_max <= 0.0 || a_max <= 0.0 || tau_max <= 0.0 {
                    return Err(bad("joint limits must be positive"));
                }
                if mass < 0.0 {
                    return Err(bad("negative mass"));
                }
            }
            ModuleKind::Link { length, mass } => {
                if !length.is_finite() || !mass.is_finite() {
                    return Err(bad("non-finite field"));
                }
                if length <= 0.0 {
                    return Err(bad("link length must be positive"));
                }
                if mass < 0.0 {
                    return Err(bad("negative mass"));
                }
            }
        }
        Ok(())
    }
}

/// Limits and mass of one actuated joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointParams {
    pub v_max: f64,
    pub a_max: f64,
    pub tau_max: f64,
    pub mass: f64,
}

/// A link piece inside a joint's distal segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinkPiece {
    pub(crate) offset: f64,
    pub(crate) length: f64,
    pub(crate) mass: f64,
}

/// An assembled robot: the hyperparameter searched by the outer optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModuleSpec>", into = "Vec<ModuleSpec>")]
pub struct Composition {
    modules: Vec<ModuleSpec>,
    joints: Vec<JointParams>,
    segment_lengths: Vec<f64>,
    pieces: Vec<Vec<LinkPiece>>,
}

impl Composition {
    pub fn new(modules: Vec<ModuleSpec>) -> Result<Self, ModelError> {
        for m in &modules {
            m.validate()?;
        }
        match modules.first() {
            None => return Err(ModelError::InvalidComposition("no modules".into())),
            Some(m) if !m.is_joint() => {
                return Err(ModelError::InvalidComposition(
                    "first module must be a joint".into(),
                ))
            }
            _ => {}
        }
        let mut joints = Vec::new();
        let mut pieces: Vec<Vec<LinkPiece>> = Vec::new();
        for m in &modules {
            match m.kind {
                ModuleKind::Joint {
                    v_max,
                    a_max,
                    tau_max,
                    mass,
                } => {
                    joints.push(JointParams {
                        v_max,
                        a_max,
                        tau_max,
                        mass,
                    });
                    pieces.push(Vec::new());
                }
                ModuleKind::Link { length, mass } => {
                    let seg = pieces.last_mut().expect("first module is a joint");
                    let offset = seg.iter().map(|p| p.length).sum();
                    seg.push(LinkPiece {
                        offset,
                        length,
                        mass,
                    });
                }
            }
        }
        let segment_lengths = pieces
            .iter()
            .map(|s| s.iter().map(|p| p.length).sum())
            .collect();
        Ok(Self {
            modules,
            joints,
            segment_lengths,
            pieces,
        })
    }

    /// Resolves an ordered list of module ids against a library.
    pub fn from_ids<S: AsRef<str>>(ids: &[S], library: &[ModuleSpec]) -> Result<Self, ModelError> {
        let modules = ids
            .iter()
            .map(|id| {
                library
                    .iter()
                    .find(|m| m.id == id.as_ref())
                    .cloned()
                    .ok_or_else(|| ModelError::UnknownModule(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(modules)
    }

    /// Joint-link-joint-link shorthand used heavily in tests and examples.
    pub fn serial(lengths: &[f64], v_max: f64, a_max: f64) -> Result<Self, ModelError> {
        let mut modules = Vec::new();
        for (i, &l) in lengths.iter().enumerate() {
            modules.push(ModuleSpec::joint(format!("J{i}"), v_max, a_max, 1e6, 0.0));
            modules.push(ModuleSpec::link(format!("L{i}"), l, 0.0));
        }
        Self::new(modules)
    }

    pub fn modules(&self) -> &[ModuleSpec] {
        &self.modules
    }

    pub fn n_q(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[JointParams] {
        &self.joints
    }

    /// Distal segment length of each joint (zero when no link follows it).
    pub fn segment_lengths(&self) -> &[f64] {
        &self.segment_lengths
    }

    pub(crate) fn pieces(&self) -> &[Vec<LinkPiece>] {
        &self.pieces
    }

    pub fn total_length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    pub fn v_max(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.v_max).collect()
    }

    pub fn a_max(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.a_max).collect()
    }

    /// Identifier built from the module ids, e.g. `J1-L1-J2`.
    pub fn id(&self) -> String {
        self.modules
            .iter()
            .map(|m| m.id.as_str())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<(), ModelError> {
        if len != self.n_q() {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_q(),
                got: len,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<ModuleSpec>> for Composition {
    type Error = ModelError;

    fn try_from(modules: Vec<ModuleSpec>) -> Result<Self, Self::Error> {
        Self::new(modules)
    }
}

impl From<Composition> for Vec<ModuleSpec> {
    fn from(c: Composition) -> Self {
        c.modules
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Planar end-effector pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose2 {
    /// Builds a pose with `phi` wrapped into (-pi, pi].
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self {
            x,
            y,
            phi: wrap_angle(phi),
        }
    }

    pub fn distance_from_origin(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Joint angles, every component in (-pi, pi].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointConfig(Vec<f64>);

impl JointConfig {
    pub(crate) fn from_canonical(q: Vec<f64>) -> Self {
        debug_assert!(q.iter().all(|v| *v > -std::f64::consts::PI && *v <= std::f64::consts::PI));
        Self(q)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest per-joint wrapped distance to `other`.
    pub fn wrapped_distance(&self, other: &JointConfig) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| wrap_angle(a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Wraps every entry into (-pi, pi].
pub fn canonicalize(q_raw: &[f64]) -> Result<JointConfig, ModelError> {
    q_raw
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.is_finite() {
                Ok(wrap_angle(v))
            } else {
                Err(ModelError::NonFinite(i))
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(JointConfig)
}

/// Absolute joint target that encodes the rotation direction of every joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnwrappedTarget {
    pub q_abs: Vec<f64>,
    pub origin: JointConfig,
}

impl UnwrappedTarget {
    pub fn new(q_abs: Vec<f64>, origin: JointConfig) -> Result<Self, ModelError> {
        if q_abs.len() != origin.len() {
            return Err(ModelError::DimensionMismatch {
                expected: origin.len(),
                got: q_abs.len(),
            });
        }
        for (i, (t, o)) in q_abs.iter().zip(origin.as_slice()).enumerate() {
            if !t.is_finite() {
                return Err(ModelError::NonFinite(i));
            }
            if (t - o).abs() > TAU + 1e-9 {
                return Err(ModelError::InvalidComposition(format!(
                    "joint {i} target moves more than a full turn"
                )));
            }
        }
        Ok(Self { q_abs, origin })
    }

    pub fn displacement(&self) -> Vec<f64> {
        self.q_abs
            .iter()
            .zip(self.origin.as_slice())
            .map(|(t, o)| t - o)
            .collect()
    }

    /// The canonical configuration this target lands on.
    pub fn canonical(&self) -> JointConfig {
        JointConfig(self.q_abs.iter().map(|&v| wrap_angle(v)).collect())
    }
}
