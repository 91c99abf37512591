//! Exact-in-law sampler for the (rough) Bergomi forward variance.
//!
//! For fixed maturity `t + x` the forward variance is a lognormal martingale
//! in `t`, so the curve at time `t` can be sampled without time stepping:
//!
//! ```text
//! lambda_t(x) = lambda0(t + x) exp( G_x - Var(G_x) / 2 ),
//! Cov(G_x, G_x') = sum_l int_0^t K_l(s + x) K_l(s + x') ds.
//! ```
//!
//! The covariance over the VIX grid is assembled by Gauss-Legendre time
//! quadrature and factored by Cholesky; a single diagonal jitter of
//! `1e-12 * trace` is added when the factorization fails, which it routinely
//! does for separable kernels (a one-factor exponential kernel makes the
//! covariance exactly rank one). The drift correction uses the jittered
//! diagonal so the sampled field stays an exact martingale.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::forwardvariance::{ForwardCurve, KernelSpec};
use crate::quadrature::GaussLegendre;

use super::{path_rng, McError, SimConfig};

const COVARIANCE_TIME_NODES: usize = 64;

/// Samples of `VIX^2_t = Delta^-1 int_0^Delta lambda_t(x) dx`, one per path,
/// with the spatial integral discretised by the trapezoid rule on an
/// `n_x`-point uniform grid over `[0, Delta]`.
pub fn simulate_bergomi_vix(
    kernels: &[KernelSpec],
    curve: &ForwardCurve,
    t: f64,
    delta: f64,
    n_x: usize,
    cfg: &SimConfig,
) -> Result<Vec<f64>, McError> {
    cfg.validate()?;
    if n_x < 2 {
        return Err(McError::InvalidConfig(format!(
            "n_x = {n_x} grid points; the trapezoid rule needs at least 2"
        )));
    }
    if delta.is_nan() || delta <= 0.0 || t.is_nan() || t < 0.0 {
        return Err(McError::InvalidConfig(format!(
            "need delta > 0 and t >= 0, got delta = {delta}, t = {t}"
        )));
    }
    curve.validate(t + delta)?;
    for kernel in kernels {
        kernel.validate()?;
    }

    let h = delta / (n_x - 1) as f64;
    let grid: Vec<f64> = (0..n_x).map(|i| i as f64 * h).collect();
    let forward: Vec<f64> = grid.iter().map(|&x| curve.value(t + x)).collect();

    // Trapezoid weights normalised by the window length.
    let mut quad_w = vec![h / delta; n_x];
    quad_w[0] *= 0.5;
    quad_w[n_x - 1] *= 0.5;

    let (chol, diag) = covariance_factor(kernels, &grid, t)?;

    let samples: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(cfg.seed, path as u64);
            let z: Vec<f64> = (0..n_x).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut vix2 = 0.0;
            for i in 0..n_x {
                let mut g = 0.0;
                for (j, &zj) in z.iter().enumerate().take(i + 1) {
                    g += chol[(i, j)] * zj;
                }
                let lambda = forward[i] * (g - 0.5 * diag[i]).exp();
                vix2 += quad_w[i] * lambda;
            }
            vix2
        })
        .collect();
    Ok(samples)
}

/// Cholesky factor of the grid covariance, with the effective (jittered)
/// diagonal actually sampled.
fn covariance_factor(
    kernels: &[KernelSpec],
    grid: &[f64],
    t: f64,
) -> Result<(DMatrix<f64>, Vec<f64>), McError> {
    let n = grid.len();
    let mut cov = DMatrix::<f64>::zeros(n, n);
    if t > 0.0 && !kernels.is_empty() {
        let rule = GaussLegendre::new(COVARIANCE_TIME_NODES);
        let (s_nodes, s_weights) = rule.mapped(0.0, t);
        // K_l(s + x_i) for every kernel, time node and grid point.
        let kernel_values: Vec<Vec<f64>> = kernels
            .iter()
            .map(|kernel| {
                s_nodes
                    .iter()
                    .flat_map(|&s| grid.iter().map(move |&x| kernel.value(s + x)))
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for values in &kernel_values {
                    for (si, &w) in s_weights.iter().enumerate() {
                        acc += w * values[si * n + i] * values[si * n + j];
                    }
                }
                cov[(i, j)] = acc;
                cov[(j, i)] = acc;
            }
        }
    }
    if cov.iter().all(|&x| x == 0.0) {
        return Ok((DMatrix::zeros(n, n), vec![0.0; n]));
    }
    if let Some(chol) = nalgebra::Cholesky::new(cov.clone()) {
        let diag = (0..n).map(|i| cov[(i, i)]).collect();
        return Ok((chol.unpack(), diag));
    }
    let jitter = 1e-12 * cov.trace();
    let mut jittered = cov.clone();
    for i in 0..n {
        jittered[(i, i)] += jitter;
    }
    match nalgebra::Cholesky::new(jittered.clone()) {
        Some(chol) => {
            let diag = (0..n).map(|i| jittered[(i, i)]).collect();
            Ok((chol.unpack(), diag))
        }
        None => {
            let min_eigenvalue = cov
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            Err(McError::CovarianceNotPd { min_eigenvalue })
        }
    }
}
