use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Moves every `wall_time` entry of `v` into `timing`, keyed by its JSON
/// pointer, so that the remaining document is reproducible.
pub fn extract_timing(v: &mut Value, path: &str, timing: &mut Map<String, Value>) {
    match v {
        Value::Object(map) => {
            if let Some(t) = map.remove("wall_time") {
                timing.insert(format!("{path}/wall_time"), t);
            }
            for (k, child) in map.iter_mut() {
                extract_timing(child, &format!("{path}/{k}"), timing);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter_mut().enumerate() {
                extract_timing(child, &format!("{path}/{i}"), timing);
            }
        }
        _ => {}
    }
}

/// Serializes `body`, strips wall-clock values into a `timing` object and
/// merges `extra_timing` into it.
pub fn document<T: Serialize>(body: &T, extra_timing: Map<String, Value>) -> Result<Value> {
    let mut v = serde_json::to_value(body)?;
    let mut timing = Map::new();
    extract_timing(&mut v, "", &mut timing);
    timing.extend(extra_timing);
    v.as_object_mut()
        .context("report body must be an object")?
        .insert("timing".into(), Value::Object(timing));
    Ok(v)
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// Shortest round-trip text for a float; `inf` for infinite costs.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
