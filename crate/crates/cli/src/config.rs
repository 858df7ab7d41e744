use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cellforge_core::bilevel::BilevelConfig;
use cellforge_core::planners::PlannerConfig;
use cellforge_core::traj::{Connector, ConnectorKind, SamplingConfig, TwoStageBudget};
use cellforge_core::GeneratorParams;
use serde::{Deserialize, Serialize};

/// Composition search limits used by `optimize`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LibraryLimits {
    pub max_modules: usize,
    pub max_motors: usize,
    pub min_motors: usize,
}

impl Default for LibraryLimits {
    fn default() -> Self {
        Self {
            max_modules: 6,
            max_motors: 3,
            min_motors: 1,
        }
    }
}

/// Everything a run depends on besides its input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Sample spacing of exported trajectory CSVs, seconds.
    pub export_dt: f64,
    pub planner: PlannerConfig,
    pub two_stage: TwoStageBudget,
    pub sampling: SamplingConfig,
    pub generator: GeneratorParams,
    pub library: LibraryLimits,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: None,
            out: None,
            jobs: None,
            export_dt: 0.01,
            planner: PlannerConfig::default(),
            two_stage: TwoStageBudget::default(),
            sampling: SamplingConfig::default(),
            generator: GeneratorParams::default(),
            library: LibraryLimits::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let ik = &self.planner.ik;
        if ik.n_starts == 0 || ik.max_iters == 0 {
            bail!("planner.ik: n_starts and max_iters must be positive");
        }
        if !(ik.eps_pos > 0.0 && ik.eps_ang > 0.0 && ik.damping > 0.0 && ik.dedup_radius > 0.0) {
            bail!("planner.ik: tolerances and damping must be positive");
        }
        if !self.two_stage.cheap.is_valid() || !self.two_stage.full.is_valid() {
            bail!("two_stage: budgets must be positive");
        }
        if !self.sampling.is_valid() {
            bail!("sampling: budget must be positive");
        }
        if !(self.export_dt > 0.0 && self.export_dt.is_finite()) {
            bail!("export_dt must be positive");
        }
        if self.jobs == Some(0) {
            bail!("jobs must be positive");
        }
        self.generator.validate().context("generator")?;
        let l = &self.library;
        if l.min_motors == 0 || l.max_motors > l.max_modules {
            bail!("library: need min_motors >= 1 and max_motors <= max_modules");
        }
        Ok(())
    }

    /// The part of the configuration that determines results. Output
    /// location and thread count are left out.
    pub fn reproducible(&self, seed: u64) -> Self {
        Self {
            master_seed: Some(seed),
            out: None,
            jobs: None,
            ..self.clone()
        }
    }

    pub fn connector(&self, kind: ConnectorKind) -> Connector {
        match kind {
            ConnectorKind::Deterministic => Connector::Deterministic,
            ConnectorKind::TwoStage => Connector::TwoStage(self.two_stage),
            ConnectorKind::Sampling => Connector::Sampling(self.sampling),
        }
    }

    pub fn bilevel(&self) -> BilevelConfig {
        BilevelConfig {
            planner: self.planner.clone(),
            two_stage: self.two_stage,
            sampling: self.sampling,
        }
    }
}
