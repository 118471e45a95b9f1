//! Run configuration: one JSON document with a `kind` discriminator.
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{Layout, Objective};
use crate::error::{Error, Result};
use crate::mc::chain::{Scheme, DEFAULT_LINKS};
use crate::mc::single_link::{SingleLinkScheme, DEFAULT_POINTS};

fn default_key_threshold() -> f64 {
    0.01
}
fn default_b() -> f64 {
    0.1
}
fn default_eta0() -> f64 {
    0.98
}
fn default_sigma() -> f64 {
    0.09
}
fn default_true() -> bool {
    true
}
fn default_links() -> usize {
    DEFAULT_LINKS
}
fn default_points() -> usize {
    DEFAULT_POINTS
}

/// Settings shared by every experiment; command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub precision: Option<u32>,
    #[serde(default)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    #[serde(default = "AnalyticConfig::default_eta0")]
    pub eta0: Vec<f64>,
    #[serde(default = "AnalyticConfig::default_sigma")]
    pub sigma_gkp: Vec<f64>,
    #[serde(default = "default_key_threshold")]
    pub key_threshold: f64,
    /// Pin the station spacing instead of optimising it.
    #[serde(default)]
    pub spacing_km: Option<f64>,
    #[serde(default)]
    pub common: Common,
}

impl AnalyticConfig {
    fn default_eta0() -> Vec<f64> {
        vec![0.98]
    }
    fn default_sigma() -> Vec<f64> {
        vec![0.08, 0.09, 0.1, 0.11]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_eta0")]
    pub eta0: f64,
    #[serde(default = "default_sigma")]
    pub sigma_gkp: f64,
    pub scheme: Scheme,
    pub n_multi: u32,
    pub n_all: u32,
    #[serde(default = "default_b")]
    pub threshold_b: f64,
    #[serde(default = "default_links")]
    pub links: usize,
    #[serde(default = "default_true")]
    pub analog: bool,
    /// Ignore fibre attenuation (noiseless reference runs together with η₀ = 1, σ = 0).
    #[serde(default)]
    pub lossless: bool,
    /// Also report the achievable distance implied by the estimate.
    #[serde(default = "default_key_threshold")]
    pub key_threshold: f64,
    #[serde(default)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleLinkConfig {
    /// Explicit loss values; otherwise `points` evenly spaced over [0.08, 0.2].
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "SingleLinkConfig::all_schemes")]
    pub schemes: Vec<SingleLinkScheme>,
    #[serde(default = "default_b")]
    pub threshold_b: f64,
    #[serde(default)]
    pub common: Common,
}

impl SingleLinkConfig {
    fn all_schemes() -> Vec<SingleLinkScheme> {
        SingleLinkScheme::ALL.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    #[serde(default = "default_eta0")]
    pub eta0: f64,
    #[serde(default = "default_sigma")]
    pub sigma_gkp: f64,
    pub scheme: Scheme,
    #[serde(default = "CostConfig::default_distances")]
    pub distances_km: Vec<f64>,
    /// Layouts to consider; all 158 by default.
    #[serde(default)]
    pub layouts: Option<Vec<Layout>>,
    #[serde(default = "CostConfig::default_objective")]
    pub objective: Objective,
    #[serde(default = "default_b")]
    pub threshold_b: f64,
    #[serde(default = "default_links")]
    pub links: usize,
    #[serde(default)]
    pub common: Common,
}

impl CostConfig {
    pub fn default_distances() -> Vec<f64> {
        (1..=20).map(|i| 500.0 * i as f64).collect()
    }
    fn default_objective() -> Objective {
        Objective::MinCost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "AnalyticConfig::default_eta0")]
    pub eta0: Vec<f64>,
    #[serde(default = "AnalyticConfig::default_sigma")]
    pub sigma_gkp: Vec<f64>,
    pub scheme: Scheme,
    #[serde(default)]
    pub layouts: Option<Vec<Layout>>,
    #[serde(default = "default_b")]
    pub threshold_b: f64,
    #[serde(default = "default_links")]
    pub links: usize,
    #[serde(default = "default_true")]
    pub analog: bool,
    #[serde(default)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunConfig {
    Analytic(AnalyticConfig),
    Simulate(SimulateConfig),
    SingleLink(SingleLinkConfig),
    Cost(CostConfig),
    Sweep(SweepConfig),
}

impl RunConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            RunConfig::Analytic(_) => "analytic",
            RunConfig::Simulate(_) => "simulate",
            RunConfig::SingleLink(_) => "single-link",
            RunConfig::Cost(_) => "cost",
            RunConfig::Sweep(_) => "sweep",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            RunConfig::Analytic(c) => &c.common,
            RunConfig::Simulate(c) => &c.common,
            RunConfig::SingleLink(c) => &c.common,
            RunConfig::Cost(c) => &c.common,
            RunConfig::Sweep(c) => &c.common,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Default configuration for a command run without `--config`.
    pub fn default_for(kind: &str) -> Result<Self> {
        let json = match kind {
            "analytic" => r#"{"kind":"analytic"}"#,
            "simulate" => r#"{"kind":"simulate","scheme":"gkp-only","n_multi":40,"n_all":40}"#,
            "single-link" => r#"{"kind":"single-link"}"#,
            "cost" => r#"{"kind":"cost","scheme":"steane7"}"#,
            "sweep" => r#"{"kind":"sweep","scheme":"gkp-only","layouts":[{"n_multi":40,"n_all":40}]}"#,
            other => return Err(Error::Config(format!("unknown experiment kind '{other}'"))),
        };
        Self::from_json(json)
    }
}
