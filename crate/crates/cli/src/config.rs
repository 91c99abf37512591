//! Run configuration: one JSON document per invocation.
//!
//! The document carries the command tag, a mandatory seed (no wall-clock
//! default, so every published number is reproducible) and the
//! command-specific payload at the top level. An optional `mc` block turns a
//! command into a comparison run against its Monte Carlo oracle.

use serde::Deserialize;

use polymoment::forwardvariance::{ForwardCurve, KernelSpec, DEFAULT_VIX_WINDOW};
use polymoment::generator::{GeneratorSpecJson, PolyJson};
use polymoment::mcsim::SigmaEntry;

#[derive(Debug, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Default output path when `--out` is not given.
    #[serde(default)]
    pub out: Option<String>,
    /// Default output format when `--format` is not given.
    #[serde(default)]
    pub format: Option<String>,
    #[serde(flatten)]
    pub command: CommandConfig,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Moments(MomentsConfig),
    VixBergomi(VixBergomiConfig),
    VixVolterra(VixVolterraConfig),
    Signature(SignatureConfig),
    Simulate(SimulateConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Moments(_) => "moments",
            CommandConfig::VixBergomi(_) => "vix-bergomi",
            CommandConfig::VixVolterra(_) => "vix-volterra",
            CommandConfig::Signature(_) => "signature",
            CommandConfig::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct MomentsConfig {
    pub generator: GeneratorSpecJson,
    pub truncation: u32,
    pub y0: Vec<f64>,
    pub horizon: f64,
    #[serde(default)]
    pub mc: Option<DiffusionMcConfig>,
}

#[derive(Debug, Deserialize)]
pub struct DiffusionMcConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub sigma: Vec<Vec<SigmaEntry>>,
    #[serde(default)]
    pub clamp: Option<ClampConfig>,
}

#[derive(Debug, Deserialize)]
pub struct ClampConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct VixBergomiConfig {
    pub curve: ForwardCurve,
    pub kernels: Vec<KernelSpec>,
    pub t: f64,
    #[serde(default = "default_window")]
    pub delta: f64,
    pub k: u32,
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    #[serde(default)]
    pub mc: Option<BergomiMcConfig>,
}

#[derive(Debug, Deserialize)]
pub struct BergomiMcConfig {
    pub n_paths: usize,
    #[serde(default = "default_grid")]
    pub n_x: usize,
}

#[derive(Debug, Deserialize)]
pub struct VixVolterraConfig {
    pub b: f64,
    pub gamma: f64,
    pub omega: f64,
    pub t: f64,
    #[serde(default = "default_window")]
    pub delta: f64,
    pub k: u32,
    #[serde(default)]
    pub mc: Option<VolterraMcConfig>,
}

#[derive(Debug, Deserialize)]
pub struct VolterraMcConfig {
    pub n_paths: usize,
    /// For `k = 1` the sampler is jump-free with unit weights; with this
    /// flag the uniform start is averaged by quadrature instead of sampled,
    /// removing all Monte Carlo randomness.
    #[serde(default)]
    pub exact_k1: bool,
}

#[derive(Debug, Deserialize)]
pub struct SignatureConfig {
    pub dim: usize,
    pub level: usize,
    pub t: f64,
}

#[derive(Debug, Deserialize)]
pub struct SimulateConfig {
    pub generator: GeneratorSpecJson,
    pub sigma: Vec<Vec<SigmaEntry>>,
    pub y0: Vec<f64>,
    pub horizon: f64,
    pub n_paths: usize,
    pub dt: f64,
    #[serde(default)]
    pub clamp: Option<ClampConfig>,
    /// Polynomial whose expectation is estimated on the terminal samples.
    pub polynomial: PolyJson,
}

fn default_window() -> f64 {
    DEFAULT_VIX_WINDOW
}

fn default_nodes() -> usize {
    32
}

fn default_grid() -> usize {
    64
}
