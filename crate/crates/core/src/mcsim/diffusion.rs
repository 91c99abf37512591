//! Euler-Maruyama oracle for finite-dimensional polynomial diffusions.
//!
//! The generator only sees the quadratic form `a = sigma sigma^T`, so the
//! simulator takes the factor separately and checks the consistency
//! symbolically before running.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generator::GeneratorSpec;
use crate::polybasis::Polynomial;

use super::{path_rng, BoundaryPolicy, McError, SimConfig};

/// One entry of the diffusion factor `sigma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum SigmaEntry {
    /// A polynomial entry.
    Poly { poly: PolyTerms },
    /// The square root of a polynomial; the radicand is clamped at zero
    /// before taking the root (full truncation).
    Sqrt { poly: PolyTerms },
}

/// Wire form of a polynomial entry, reusing the generator term schema.
pub type PolyTerms = Vec<crate::generator::TermJson>;

/// Diffusion factor entry in symbolic form.
#[derive(Debug, Clone)]
enum Factor {
    Poly(Polynomial),
    SqrtPoly(Polynomial),
}

impl Factor {
    fn eval(&self, y: &[f64]) -> Result<f64, McError> {
        Ok(match self {
            Factor::Poly(p) => p.eval(y)?,
            Factor::SqrtPoly(q) => q.eval(y)?.max(0.0).sqrt(),
        })
    }

    /// Symbolic product of two factors, when it is a polynomial.
    fn product(&self, other: &Factor) -> Option<Polynomial> {
        match (self, other) {
            (Factor::Poly(p), Factor::Poly(q)) => p.mul(q).ok(),
            (Factor::SqrtPoly(p), Factor::SqrtPoly(q)) if p == q => Some(p.clone()),
            _ => None,
        }
    }
}

/// A pure-diffusion model: generator spec plus a user-supplied factor
/// `sigma` (`d x m`) with `sigma sigma^T = a`.
#[derive(Debug, Clone)]
pub struct DiffusionModel {
    spec: GeneratorSpec,
    sigma: Vec<Vec<Factor>>,
}

impl DiffusionModel {
    pub fn new(spec: GeneratorSpec, sigma: Vec<Vec<SigmaEntry>>) -> Result<Self, McError> {
        let dim = spec.dim();
        if sigma.len() != dim {
            return Err(McError::InvalidConfig(format!(
                "sigma has {} rows, expected {dim}",
                sigma.len()
            )));
        }
        let m = sigma.first().map_or(0, |row| row.len());
        if sigma.iter().any(|row| row.len() != m) {
            return Err(McError::InvalidConfig(
                "sigma rows have unequal lengths".into(),
            ));
        }
        let sigma = sigma
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|entry| {
                        Ok(match entry {
                            SigmaEntry::Poly { poly } => {
                                Factor::Poly(crate::generator::poly_from_json(dim, &poly)?)
                            }
                            SigmaEntry::Sqrt { poly } => {
                                Factor::SqrtPoly(crate::generator::poly_from_json(dim, &poly)?)
                            }
                        })
                    })
                    .collect::<Result<Vec<_>, McError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let model = DiffusionModel { spec, sigma };
        model.validate()?;
        Ok(model)
    }

    /// Builds a model directly from polynomials (poly entries) or radicands
    /// (sqrt entries); `None` marks a sqrt entry.
    pub fn from_factors(
        spec: GeneratorSpec,
        factors: Vec<Vec<(Polynomial, bool)>>,
    ) -> Result<Self, McError> {
        let sigma = factors
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(p, is_sqrt)| {
                        if is_sqrt {
                            Factor::SqrtPoly(p)
                        } else {
                            Factor::Poly(p)
                        }
                    })
                    .collect()
            })
            .collect();
        let model = DiffusionModel { spec, sigma };
        model.validate()?;
        Ok(model)
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn n_factors(&self) -> usize {
        self.sigma.first().map_or(0, |row| row.len())
    }

    /// Rejects jump moments and verifies `sigma sigma^T = a` term by term.
    pub fn validate(&self) -> Result<(), McError> {
        if self.spec.has_jumps() {
            return Err(McError::JumpsUnsupported);
        }
        let dim = self.spec.dim();
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Polynomial::zero(dim);
                for l in 0..self.n_factors() {
                    match self.sigma[i][l].product(&self.sigma[j][l]) {
                        Some(p) => acc = acc.add(&p)?,
                        None => return Err(McError::SigmaUnverifiable { i, j }),
                    }
                }
                if &acc != self.spec.diffusion(i, j) {
                    return Err(McError::SigmaMismatch { i, j });
                }
            }
        }
        Ok(())
    }
}

/// Terminal samples of the Euler-Maruyama scheme, one state vector per path.
/// The step count is `ceil(horizon / dt)`, with the step shrunk to land on
/// the horizon exactly; the estimate depends only on `(seed, n_paths, dt)`,
/// never on the executing thread count.
pub fn simulate_diffusion(
    model: &DiffusionModel,
    y0: &[f64],
    horizon: f64,
    cfg: &SimConfig,
) -> Result<Vec<Vec<f64>>, McError> {
    cfg.validate()?;
    model.validate()?;
    let dim = model.spec.dim();
    if y0.len() != dim {
        return Err(McError::InvalidConfig(format!(
            "y0 has dimension {}, expected {dim}",
            y0.len()
        )));
    }
    if horizon < 0.0 {
        return Err(McError::InvalidConfig(format!(
            "horizon {horizon} must be non-negative"
        )));
    }
    if horizon == 0.0 {
        return Ok(vec![y0.to_vec(); cfg.n_paths]);
    }
    let n_steps = (horizon / cfg.dt).ceil() as usize;
    let dt = horizon / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let m = model.n_factors();

    let samples: Result<Vec<Vec<f64>>, McError> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(cfg.seed, path as u64);
            let mut y = y0.to_vec();
            let mut step = vec![0.0; dim];
            let mut noise = vec![0.0; m];
            for _ in 0..n_steps {
                for z in noise.iter_mut() {
                    *z = StandardNormal.sample(&mut rng);
                }
                // Drift and diffusion both read the pre-step state.
                for (i, slot) in step.iter_mut().enumerate() {
                    let mut dy = model.spec.drift(i).eval(&y)? * dt;
                    for (l, &z) in noise.iter().enumerate() {
                        dy += model.sigma[i][l].eval(&y)? * sqrt_dt * z;
                    }
                    *slot = dy;
                }
                for (v, &dy) in y.iter_mut().zip(&step) {
                    *v += dy;
                }
                if let BoundaryPolicy::Clamp { lo, hi } = &cfg.boundary {
                    for ((v, &l), &h) in y.iter_mut().zip(lo).zip(hi) {
                        *v = v.clamp(l, h);
                    }
                }
            }
            Ok(y)
        })
        .collect();
    samples
}
