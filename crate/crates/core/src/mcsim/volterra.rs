//! Feynman-Kac oracle for the Volterra geometric Brownian motion.
//!
//! The k-th VIX moment admits the representation
//!
//! ```text
//! E[(VIX^2_t)^k] = E[ exp( int_0^t V_k(X_tau) dtau )
//!                     prod_i lambda0(X_t,i) ],   X_0 ~ U([0, Delta]^k),
//! ```
//!
//! where `X` drifts at unit rate in every coordinate and jumps with
//! state-dependent intensity `V_k(x) = sum_{i<j} K(x_i) K(x_j)`; at a jump a
//! pair `(i, j)` is selected with probability proportional to
//! `K(x_i) K(x_j)` and both components are reset to zero. Jump times are
//! drawn by thinning: along a drift segment the intensity is monotone
//! decreasing for a decreasing kernel, so its value at the segment start is a
//! valid bound. The representation is proved for bounded kernels only, so
//! the sampler accepts the exponential kernel and rejects the singular rough
//! one. For `k = 1` the pair sum is empty: no jumps occur and every weight
//! is exactly one.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::forwardvariance::{classical_bergomi_pair_factor, ForwardCurve, KernelSpec};

use super::{estimate_from_values, McError, McEstimate, SimConfig};

/// Outcome of one PDMP path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdmpPath {
    /// Feynman-Kac weight `exp( int_0^t V_k dtau )`.
    pub weight: f64,
    /// Terminal payoff `prod_i lambda0(X_t,i)`.
    pub payoff: f64,
    pub n_jumps: usize,
}

/// Estimate of `E[(VIX^2_t)^k]` from the weighted PDMP paths.
pub fn simulate_volterra_pdmp(
    kernel: &KernelSpec,
    curve: &ForwardCurve,
    t: f64,
    delta: f64,
    k: u32,
    cfg: &SimConfig,
) -> Result<McEstimate, McError> {
    let paths = simulate_volterra_pdmp_paths(kernel, curve, t, delta, k, cfg)?;
    let values: Vec<f64> = paths.iter().map(|p| p.weight * p.payoff).collect();
    estimate_from_values(&values)
}

/// Per-path weights and payoffs of the PDMP sampler.
pub fn simulate_volterra_pdmp_paths(
    kernel: &KernelSpec,
    curve: &ForwardCurve,
    t: f64,
    delta: f64,
    k: u32,
    cfg: &SimConfig,
) -> Result<Vec<PdmpPath>, McError> {
    cfg.validate()?;
    if k < 1 {
        return Err(McError::InvalidConfig("moment order k must be >= 1".into()));
    }
    if delta.is_nan() || delta <= 0.0 || t.is_nan() || t < 0.0 {
        return Err(McError::InvalidConfig(format!(
            "need delta > 0 and t >= 0, got delta = {delta}, t = {t}"
        )));
    }
    let (omega, gamma) = match kernel {
        KernelSpec::Exponential { omega, gamma } => (*omega, *gamma),
        KernelSpec::Rough { .. } => {
            return Err(McError::UnsupportedKernel(
                "the Feynman-Kac representation requires a bounded kernel; \
                 the rough kernel is singular at zero"
                    .into(),
            ))
        }
    };
    kernel.validate()?;
    curve.validate(t + delta)?;
    let k = k as usize;

    (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = super::path_rng(cfg.seed, path as u64);
            let mut x: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..delta)).collect();
            let mut log_weight = 0.0;
            let mut remaining = t;
            let mut n_jumps = 0usize;

            loop {
                let bound = pair_intensity_sum(omega, gamma, &x);
                if bound <= 0.0 {
                    // V stays zero along the whole segment (k = 1 or a zero
                    // kernel weight): drift to the horizon.
                    for xi in x.iter_mut() {
                        *xi += remaining;
                    }
                    break;
                }
                // Candidate waiting time with rate `bound`.
                let exponential: f64 = Exp1.sample(&mut rng);
                let wait = exponential / bound;
                if wait >= remaining {
                    log_weight += segment_potential_integral(omega, gamma, &x, remaining);
                    for xi in x.iter_mut() {
                        *xi += remaining;
                    }
                    break;
                }
                log_weight += segment_potential_integral(omega, gamma, &x, wait);
                for xi in x.iter_mut() {
                    *xi += wait;
                }
                remaining -= wait;

                let intensity = pair_intensity_sum(omega, gamma, &x);
                if intensity > bound * (1.0 + 1e-12) {
                    return Err(McError::ThinningBoundViolated { bound, intensity });
                }
                if rng.gen_range(0.0..1.0) < intensity / bound {
                    // Accepted jump: pick the pair by a cumulative scan of
                    // K(x_i) K(x_j) and reset both components to zero.
                    let target = rng.gen_range(0.0..1.0) * intensity;
                    let mut acc = 0.0;
                    let mut selected = (0usize, 1usize);
                    'outer: for i in 0..k {
                        for j in (i + 1)..k {
                            acc +=
                                kernel_value(omega, gamma, x[i]) * kernel_value(omega, gamma, x[j]);
                            if acc >= target {
                                selected = (i, j);
                                break 'outer;
                            }
                        }
                    }
                    x[selected.0] = 0.0;
                    x[selected.1] = 0.0;
                    n_jumps += 1;
                }
            }

            let payoff = x.iter().map(|&xi| curve.value(xi)).product();
            Ok(PdmpPath {
                weight: log_weight.exp(),
                payoff,
                n_jumps,
            })
        })
        .collect()
}

fn kernel_value(omega: f64, gamma: f64, x: f64) -> f64 {
    omega * (-gamma * x).exp()
}

/// `V_k(x) = sum_{i<j} K(x_i) K(x_j)`; empty sum for `k = 1`.
fn pair_intensity_sum(omega: f64, gamma: f64, x: &[f64]) -> f64 {
    let k = x.len();
    let mut acc = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            acc += kernel_value(omega, gamma, x[i]) * kernel_value(omega, gamma, x[j]);
        }
    }
    acc
}

/// Exact integral of the potential along a drift segment:
/// `int_0^s V_k(x + tau 1) dtau`, a sum of closed-form pair terms for the
/// exponential kernel.
fn segment_potential_integral(omega: f64, gamma: f64, x: &[f64], s: f64) -> f64 {
    let k = x.len();
    let mut acc = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            acc += classical_bergomi_pair_factor(omega, gamma, s, x[i], x[j]);
        }
    }
    acc
}
