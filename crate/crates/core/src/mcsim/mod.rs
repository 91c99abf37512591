//! Independent Monte Carlo oracles for the analytic routes.
//!
//! Three samplers live here: Euler-Maruyama for finite-dimensional
//! diffusions, an exact-in-law Gaussian sampler for (rough) Bergomi forward
//! variance, and a piecewise-deterministic jump process with Feynman-Kac
//! weights for the Volterra model. All of them draw from a counter-based
//! generator (ChaCha8) with one stream per path, so estimates are
//! bit-identical for a fixed `(seed, n_paths, dt)` regardless of how many
//! threads execute the paths; reductions run over the path-ordered sample
//! vector.

mod bergomi;
mod diffusion;
mod volterra;

pub use bergomi::simulate_bergomi_vix;
pub use diffusion::{simulate_diffusion, DiffusionModel, SigmaEntry};
pub use volterra::{simulate_volterra_pdmp, simulate_volterra_pdmp_paths, PdmpPath};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forwardvariance::FwdVarError;
use crate::polybasis::{PolyError, Polynomial};

/// Name of the per-path random number generator, recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("no Monte Carlo sampler is derivable for specs with jump moments")]
    JumpsUnsupported,
    #[error("sigma sigma^T does not reproduce the diffusion entry a[{i}][{j}]")]
    SigmaMismatch { i: usize, j: usize },
    #[error(
        "sigma sigma^T entry ({i},{j}) mixes square-root factors with distinct \
         radicands and cannot be compared symbolically"
    )]
    SigmaUnverifiable { i: usize, j: usize },
    #[error("empty sample set")]
    EmptySamples,
    #[error("covariance not positive definite after jitter; smallest eigenvalue {min_eigenvalue}")]
    CovarianceNotPd { min_eigenvalue: f64 },
    #[error(
        "thinning bound violated: bound {bound} < intensity {intensity}; \
         the kernel is not monotone decreasing on the segment"
    )]
    ThinningBoundViolated { bound: f64, intensity: f64 },
    #[error("kernel not supported by this sampler: {0}")]
    UnsupportedKernel(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    FwdVar(#[from] FwdVarError),
}

/// Boundary handling for the Euler scheme.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// No state projection.
    #[default]
    Free,
    /// Component-wise clamp of the state into `[lo_i, hi_i]` after every
    /// step. Square-root diffusion factors clamp their radicand at zero
    /// regardless of this policy.
    Clamp { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    #[serde(default)]
    pub boundary: BoundaryPolicy,
}

impl SimConfig {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        SimConfig {
            n_paths,
            dt,
            seed,
            boundary: BoundaryPolicy::Free,
        }
    }

    pub fn with_clamp(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.boundary = BoundaryPolicy::Clamp { lo, hi };
        self
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.n_paths == 0 {
            return Err(McError::InvalidConfig("n_paths must be at least 1".into()));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(McError::InvalidConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Mean and standard error of a Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// Per-path generator: stream `path_index` of a ChaCha8 keyed by `seed`.
pub(crate) fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Pairwise summation over a fixed partition; deterministic for a fixed
/// element order and accurate for large samples.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Estimate from a path-ordered value vector.
pub fn estimate_from_values(values: &[f64]) -> Result<McEstimate, McError> {
    if values.is_empty() {
        return Err(McError::EmptySamples);
    }
    let n = values.len();
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return Ok(McEstimate {
            mean,
            std_error: 0.0,
            n_paths: 1,
        });
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = pairwise_sum(&squares) / (n as f64 - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (variance / n as f64).sqrt(),
        n_paths: n,
    })
}

/// Mean and standard error of a polynomial evaluated on terminal samples.
pub fn mc_moment(samples: &[Vec<f64>], p: &Polynomial) -> Result<McEstimate, McError> {
    if samples.is_empty() {
        return Err(McError::EmptySamples);
    }
    let values = samples
        .iter()
        .map(|y| p.eval(y))
        .collect::<Result<Vec<f64>, _>>()?;
    estimate_from_values(&values)
}
