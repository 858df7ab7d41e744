//! Trade-off metrics of a planner variant against the reference planner, and
//! the campaign runners that produce their inputs.

mod campaign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{compensated_sum, inf_as_null, vec_inf_as_null};
use crate::world::Complexity;

pub use campaign::{
    build_population, run_campaign_repeat, run_campaign_single, PopulationSpec, Sample, VariantSpec,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{0}: no eligible records")]
    Undefined(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// One (composition, scenario) sample run by the reference and by a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    /// Composition id.
    pub x_ref: String,
    /// Scenario seed.
    pub theta_ref: u64,
    pub n_q: usize,
    pub complexity: Complexity,
    #[serde(with = "inf_as_null")]
    pub g_star: f64,
    /// Reference wall time, seconds.
    pub t_star: f64,
    #[serde(with = "inf_as_null")]
    pub g_hat: f64,
    /// Variant wall time, seconds.
    pub t_hat: f64,
}

impl SampleRecord {
    /// Record from costs and times only; identifiers left blank.
    pub fn synthetic(g_star: f64, t_star: f64, g_hat: f64, t_hat: f64) -> Self {
        Self {
            sample_id: 0,
            x_ref: String::new(),
            theta_ref: 0,
            n_q: 0,
            complexity: Complexity::Simple,
            g_star,
            t_star,
            g_hat,
            t_hat,
        }
    }
}

/// Outputs of repeated runs of one variant on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub sample_id: usize,
    #[serde(with = "vec_inf_as_null")]
    pub outputs: Vec<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Mean relative cost excess over records where both planners succeeded.
pub fn optimality_score(records: &[SampleRecord]) -> Result<f64, MetricsError> {
    let terms: Vec<f64> = records
        .iter()
        .filter(|r| r.g_star.is_finite() && r.g_hat.is_finite())
        .map(|r| {
            if r.g_star == 0.0 && r.g_hat == 0.0 {
                0.0
            } else {
                (r.g_hat - r.g_star) / r.g_star
            }
        })
        .collect();
    if terms.is_empty() {
        return Err(MetricsError::Undefined("optimality"));
    }
    Ok(mean(&terms))
}

/// Mean relative time saving over the records where both planners found a
/// plan, the same records the optimality score uses.
pub fn time_gain_score(records: &[SampleRecord]) -> Result<f64, MetricsError> {
    let eligible: Vec<&SampleRecord> = records
        .iter()
        .filter(|r| r.g_star.is_finite() && r.g_hat.is_finite())
        .collect();
    if eligible.is_empty() {
        return Err(MetricsError::Undefined("time gain"));
    }
    if let Some(r) = eligible.iter().find(|r| !(r.t_star > 0.0) || !(r.t_hat >= 0.0)) {
        return Err(MetricsError::InvalidInput(format!(
            "sample {} has t_star = {}, t_hat = {}",
            r.sample_id, r.t_star, r.t_hat
        )));
    }
    let terms: Vec<f64> = eligible.iter().map(|r| (r.t_star - r.t_hat) / r.t_star).collect();
    Ok(mean(&terms))
}

/// Fraction of reference-feasible samples the variant also solves.
pub fn robustness_score(records: &[SampleRecord]) -> Result<f64, MetricsError> {
    let cond: Vec<&SampleRecord> = records.iter().filter(|r| r.g_star.is_finite()).collect();
    if cond.is_empty() {
        return Err(MetricsError::Undefined("robustness"));
    }
    let hits = cond.iter().filter(|r| r.g_hat.is_finite()).count();
    Ok(hits as f64 / cond.len() as f64)
}

/// Population variance over mean of one record's finite outputs, or `None`
/// when fewer than two outputs are finite.
pub fn relative_variance(outputs: &[f64]) -> Option<f64> {
    let xs: Vec<f64> = outputs.iter().copied().filter(|x| x.is_finite()).collect();
    if xs.len() < 2 {
        return None;
    }
    let e = mean(&xs);
    if e == 0.0 {
        return Some(0.0);
    }
    // Shifted two-pass variance: exactly zero for constant outputs.
    let d: Vec<f64> = xs.iter().map(|x| x - xs[0]).collect();
    let md = mean(&d);
    let sq: Vec<f64> = d.iter().map(|x| (x - md) * (x - md)).collect();
    Some(mean(&sq) / e)
}

/// Mean relative variance across samples.
pub fn consistency_score(repeats: &[RepeatRecord]) -> Result<f64, MetricsError> {
    let per: Vec<f64> = repeats.iter().filter_map(|r| relative_variance(&r.outputs)).collect();
    if per.is_empty() {
        return Err(MetricsError::Undefined("consistency"));
    }
    Ok(mean(&per))
}

/// The four scores of one variant; `None` where a score is undefined for the
/// given records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: String,
    pub optimality: Option<f64>,
    pub time_gain: Option<f64>,
    pub robustness: Option<f64>,
    pub consistency: Option<f64>,
    pub n_samples: usize,
    pub n_conditioning: usize,
    pub records: Vec<SampleRecord>,
    pub repeats: Vec<RepeatRecord>,
}

impl MetricsReport {
    pub fn new(variant: impl Into<String>, records: Vec<SampleRecord>, repeats: Vec<RepeatRecord>) -> Self {
        Self {
            variant: variant.into(),
            optimality: optimality_score(&records).ok(),
            time_gain: time_gain_score(&records).ok(),
            robustness: robustness_score(&records).ok(),
            consistency: consistency_score(&repeats).ok(),
            n_samples: records.len().max(repeats.len()),
            n_conditioning: records.iter().filter(|r| r.g_star.is_finite()).count(),
            records,
            repeats,
        }
    }
}
