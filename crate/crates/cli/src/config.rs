//! Versioned JSON documents accepted by `--config`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use subelliptic::geometry::{CcOptions, Gauge};
use subelliptic::harness::BatteryConfig;
use subelliptic::solver::{center_source, Quadrature, SolveConfig};
use subelliptic::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveFile {
    pub schema_version: u32,
    pub solve: serde_json::Value,
    /// Subtract the source mean under the configured quadrature.
    #[serde(default)]
    pub center_source: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub schema_version: u32,
    pub solve: serde_json::Value,
    /// Subtract the source mean under the configured quadrature.
    #[serde(default)]
    pub center_source: bool,
    pub eps_list: Vec<f64>,
}

/// One battery per ε; a single solve at `solve.epsilon` when `eps_list` is absent.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    pub schema_version: u32,
    pub solve: serde_json::Value,
    /// Subtract the source mean under the configured quadrature.
    #[serde(default)]
    pub center_source: bool,
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default)]
    pub battery: BatteryConfig,
    #[serde(default)]
    pub sup_avg: SupAvgConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SupAvgConfig {
    pub r: f64,
    pub samples: usize,
}

impl Default for SupAvgConfig {
    fn default() -> Self {
        Self { r: 0.4, samples: 20_000 }
    }
}

/// Points are given as algebra coordinates and mapped through `exp`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcdistFile {
    pub schema_version: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub options: CcOptions,
    #[serde(default)]
    pub seed: u64,
    pub queries: Vec<Query>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Riemannian bound over the ε-frame instead of the CC bound.
    #[serde(default)]
    pub eps: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallvolFile {
    pub schema_version: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    pub gauge: Gauge,
    pub radii: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    3
}

trait Versioned {
    fn version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn version(&self) -> u32 {
                self.schema_version
            }
        }
    )*};
}
versioned!(SolveFile, SweepFile, VerifyFile, CcdistFile, BallvolFile);

#[allow(private_bounds)]
pub fn load<T: DeserializeOwned + Versioned>(path: Option<&Path>) -> Result<T, Error> {
    let path = path.ok_or_else(|| Error::Config("this command needs --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let doc: T = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if doc.version() != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            doc.version()
        )));
    }
    Ok(doc)
}

pub fn solve_config(v: &serde_json::Value, center: bool, seed: Option<u64>) -> Result<SolveConfig, Error> {
    let mut cfg = SolveConfig::from_json(v)?;
    if let (Some(s), Quadrature::MonteCarlo { points, .. }) = (seed, cfg.quadrature) {
        cfg.quadrature = Quadrature::MonteCarlo { points, seed: s };
    }
    if center {
        cfg.source = center_source(&cfg.source, &cfg.quadrature)?;
    }
    Ok(cfg)
}
