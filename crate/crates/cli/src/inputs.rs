use std::path::Path;

use anyhow::{bail, Context, Result};
use cellforge_core::metrics::PopulationSpec;
use cellforge_core::world::Complexity;
use cellforge_core::{Composition, GeneratorParams, ModuleSpec, Scenario};
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub const POPULATION_SCHEMA: &str = "cellforge-population/1";

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_json(&text).with_context(|| format!("loading scenario {}", path.display()))
}

/// A module library file: a JSON list of module specs.
pub fn load_library(path: &Path) -> Result<Vec<ModuleSpec>> {
    let lib: Vec<ModuleSpec> = read_json(path)?;
    if lib.is_empty() {
        bail!("library {} is empty", path.display());
    }
    Ok(lib)
}

/// A composition is written either as module ids resolved against a library
/// or as the module specs themselves.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CompositionSpec {
    Ids(Vec<String>),
    Modules(Vec<ModuleSpec>),
}

impl CompositionSpec {
    pub fn resolve(self, library: Option<&[ModuleSpec]>) -> Result<Composition> {
        match self {
            CompositionSpec::Ids(ids) => {
                let lib = library.context("composition given as module ids needs --library")?;
                Ok(Composition::from_ids(&ids, lib)?)
            }
            CompositionSpec::Modules(m) => Ok(Composition::new(m)?),
        }
    }
}

pub fn load_composition(path: &Path, library: Option<&[ModuleSpec]>) -> Result<Composition> {
    let spec: CompositionSpec = read_json(path)?;
    spec.resolve(library)
        .with_context(|| format!("composition {}", path.display()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationFile {
    schema: String,
    size: usize,
    compositions: Vec<CompositionSpec>,
    complexities: Vec<Complexity>,
    #[serde(default)]
    library: Option<Vec<ModuleSpec>>,
    #[serde(default)]
    generator: Option<GeneratorParams>,
}

/// Reads a population recipe. Without its own `generator` block the
/// population uses the run configuration's generator.
pub fn load_population(path: &Path, generator: &GeneratorParams) -> Result<PopulationSpec> {
    let f: PopulationFile = read_json(path)?;
    if f.schema != POPULATION_SCHEMA {
        bail!("{}: expected schema {POPULATION_SCHEMA}, found {}", path.display(), f.schema);
    }
    if f.size == 0 || f.compositions.is_empty() || f.complexities.is_empty() {
        bail!("{}: population needs a size, compositions and complexities", path.display());
    }
    let compositions = f
        .compositions
        .into_iter()
        .map(|c| c.resolve(f.library.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationSpec {
        size: f.size,
        compositions,
        complexities: f.complexities,
        generator: f.generator.unwrap_or_else(|| generator.clone()),
    })
}
