//! Config-file support: a flat TOML file mirroring the command-line flags
//! one-to-one. Flags override file values; unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub quadrature: QuadSection,
    #[serde(default)]
    pub simulation: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub dim: Option<usize>,
    pub family: Option<String>,
    pub k: Option<f64>,
    pub a: Option<f64>,
    pub p: Option<f64>,
    pub t0: Option<f64>,
    pub file: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    pub tol: Option<f64>,
    pub jmax: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub paths: Option<usize>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub cap: Option<f64>,
    pub horizon: Option<f64>,
    pub pole_guard: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<String>,
    pub path: Option<String>,
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: FileConfig = match toml::from_str(&raw) {
        Ok(c) => c,
        Err(e) => bail!("config {}: {e}", path.display()),
    };
    Ok(cfg)
}
