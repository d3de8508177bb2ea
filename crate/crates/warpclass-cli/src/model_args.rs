//! Shared model-selection flags and their resolution against the config
//! file, including tabulated-warp CSV loading.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use warpclass_core::warp::{ModelManifold, WarpingFunction};

use crate::config_file::ModelSection;
use crate::Usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Euclidean,
    Hyperbolic,
    Spherical,
    SplicedExpPower,
    Tabulated,
}

impl FamilyName {
    fn parse_str(s: &str) -> Result<Self> {
        <FamilyName as ValueEnum>::from_str(s, true)
            .map_err(|_| Usage(format!("unknown family `{s}` in config")).into())
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model dimension m >= 2 [default: 2]
    #[arg(short = 'm', long = "dim")]
    pub dim: Option<usize>,
    /// Warping family [default: euclidean]
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Curvature scale k > 0 (hyperbolic, spherical) [default: 1]
    #[arg(long)]
    pub k: Option<f64>,
    /// Growth coefficient a > 0 (spliced-exp-power) [default: 1]
    #[arg(long)]
    pub a: Option<f64>,
    /// Growth power p > 1 (spliced-exp-power) [default: 3]
    #[arg(long)]
    pub p: Option<f64>,
    /// Splice radius t0 > 0 (spliced-exp-power) [default: 1]
    #[arg(long)]
    pub t0: Option<f64>,
    /// CSV table with header `t,sigma,dsigma` (tabulated family)
    #[arg(long)]
    pub file: Option<PathBuf>,
}

impl ModelArgs {
    /// Flags override the config section; remaining holes get defaults.
    pub fn resolve(&self, cfg: &ModelSection) -> Result<ModelManifold> {
        let dim = self.dim.or(cfg.dim).unwrap_or(2);
        let family = match (&self.family, &cfg.family) {
            (Some(f), _) => *f,
            (None, Some(s)) => FamilyName::parse_str(s)?,
            (None, None) => FamilyName::Euclidean,
        };
        let warp = self.build_warp(family, cfg)?;
        Ok(ModelManifold::new(dim, warp)?)
    }

    fn build_warp(&self, family: FamilyName, cfg: &ModelSection) -> Result<WarpingFunction> {
        let k = self.k.or(cfg.k).unwrap_or(1.0);
        let a = self.a.or(cfg.a).unwrap_or(1.0);
        let p = self.p.or(cfg.p).unwrap_or(3.0);
        let t0 = self.t0.or(cfg.t0).unwrap_or(1.0);
        Ok(match family {
            FamilyName::Euclidean => WarpingFunction::euclidean(),
            FamilyName::Hyperbolic => WarpingFunction::hyperbolic(k)?,
            FamilyName::Spherical => WarpingFunction::spherical(k)?,
            FamilyName::SplicedExpPower => WarpingFunction::spliced_exp_power(a, p, t0)?,
            FamilyName::Tabulated => {
                let path = self
                    .file
                    .clone()
                    .or_else(|| cfg.file.as_ref().map(PathBuf::from))
                    .ok_or_else(|| Usage("tabulated family needs --file".into()))?;
                load_table(&path)?
            }
        })
    }
}

/// Load a tabulated warp from CSV with header `t,sigma,dsigma`.
pub fn load_table(path: &Path) -> Result<WarpingFunction> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading table {}", path.display()))?;
    let mut lines = raw.lines();
    let header = lines
        .next()
        .ok_or_else(|| Usage(format!("{}: empty table", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["t", "sigma", "dsigma"] {
        bail!(Usage(format!(
            "{}: expected header `t,sigma,dsigma`, got `{header}`",
            path.display()
        )));
    }
    let mut ts = Vec::new();
    let mut sigma = Vec::new();
    let mut dsigma = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            bail!(Usage(format!(
                "{}: row {} has {} fields, expected 3",
                path.display(),
                i + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Usage(format!("{}: bad number `{s}`", path.display())).into())
        };
        ts.push(parse(fields[0])?);
        sigma.push(parse(fields[1])?);
        dsigma.push(parse(fields[2])?);
    }
    Ok(WarpingFunction::tabulated(ts, sigma, dsigma, None)?)
}
