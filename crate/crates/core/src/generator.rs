//! Polynomial operators on `R^d` and their compilation to dual matrices.
//!
//! A generator is specified by drift polynomials `b_i` of degree at most 1, a
//! symmetric diffusion array `a_ij` of degree at most 2 and optional jump
//! moment polynomials `mu_beta` of degree at most `|beta|`. Under these degree
//! conditions the operator
//!
//! ```text
//! Lp = sum_i b_i d_i p + 1/2 sum_ij a_ij d_i d_j p + jump terms
//! ```
//!
//! maps polynomials to polynomials of no higher degree, and its action on
//! coefficient vectors up to degree `k` is a matrix `G_k`: column `j` holds
//! the coefficients of `L` applied to the `j`-th graded basis monomial.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polybasis::{Degree, GradedBasis, MultiIndex, PolyError, Polynomial};

/// Structured degree/symmetry violation discovered by validation.
#[derive(Debug, Error, PartialEq)]
pub enum Violation {
    #[error("drift[{index}] has degree {found}, allowed at most {allowed}")]
    DriftDegree {
        index: usize,
        found: Degree,
        allowed: u32,
    },
    #[error("diffusion[{i}][{j}] has degree {found}, allowed at most {allowed}")]
    DiffusionDegree {
        i: usize,
        j: usize,
        found: Degree,
        allowed: u32,
    },
    #[error("diffusion is not symmetric: a[{i}][{j}] != a[{j}][{i}]")]
    DiffusionAsymmetry { i: usize, j: usize },
    #[error("jump moment for beta = {beta} has degree {found}, allowed at most {allowed}")]
    JumpMomentDegree {
        beta: MultiIndex,
        found: Degree,
        allowed: u32,
    },
    #[error("jump moment order |beta| = {order} for beta = {beta} must be at least 2")]
    JumpOrderTooLow { beta: MultiIndex, order: u32 },
    #[error("{field} has dimension {found}, expected {expected}")]
    FieldDimension {
        field: &'static str,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error(transparent)]
    Violation(#[from] Violation),
    #[error(
        "degree increase: L applied to {input} of degree {input_degree} \
         produced degree {output_degree}"
    )]
    DegreeIncrease {
        input: MultiIndex,
        input_degree: u32,
        output_degree: u32,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Drift, diffusion and jump-moment data defining a polynomial operator.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    dim: usize,
    drift: Vec<Polynomial>,
    diffusion: Vec<Polynomial>,
    jump_moments: BTreeMap<MultiIndex, Polynomial>,
}

impl GeneratorSpec {
    /// Pure-diffusion spec; `diffusion` is the full quadratic form
    /// `a = sigma sigma^T`, row-major `d x d`.
    pub fn new(
        dim: usize,
        drift: Vec<Polynomial>,
        diffusion: Vec<Vec<Polynomial>>,
    ) -> Result<Self, Violation> {
        Self::with_jumps(dim, drift, diffusion, BTreeMap::new())
    }

    pub fn with_jumps(
        dim: usize,
        drift: Vec<Polynomial>,
        diffusion: Vec<Vec<Polynomial>>,
        jump_moments: BTreeMap<MultiIndex, Polynomial>,
    ) -> Result<Self, Violation> {
        if drift.len() != dim {
            return Err(Violation::FieldDimension {
                field: "drift",
                expected: dim,
                found: drift.len(),
            });
        }
        if diffusion.len() != dim || diffusion.iter().any(|row| row.len() != dim) {
            return Err(Violation::FieldDimension {
                field: "diffusion",
                expected: dim,
                found: diffusion.iter().map(|r| r.len()).max().unwrap_or(0),
            });
        }
        let spec = GeneratorSpec {
            dim,
            drift,
            diffusion: diffusion.into_iter().flatten().collect(),
            jump_moments,
        };
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self, i: usize) -> &Polynomial {
        &self.drift[i]
    }

    pub fn diffusion(&self, i: usize, j: usize) -> &Polynomial {
        &self.diffusion[i * self.dim + j]
    }

    pub fn has_jumps(&self) -> bool {
        !self.jump_moments.is_empty()
    }

    pub fn jump_moments(&self) -> impl Iterator<Item = (&MultiIndex, &Polynomial)> {
        self.jump_moments.iter()
    }

    /// Checks the degree and symmetry invariants, reporting the first
    /// offending field.
    pub fn validate(&self) -> Result<(), Violation> {
        for (i, b) in self.drift.iter().enumerate() {
            if !b.degree().at_most(1) {
                return Err(Violation::DriftDegree {
                    index: i,
                    found: b.degree(),
                    allowed: 1,
                });
            }
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.diffusion(i, j);
                if !a.degree().at_most(2) {
                    return Err(Violation::DiffusionDegree {
                        i,
                        j,
                        found: a.degree(),
                        allowed: 2,
                    });
                }
                if j > i && a != self.diffusion(j, i) {
                    return Err(Violation::DiffusionAsymmetry { i, j });
                }
            }
        }
        for (beta, mu) in &self.jump_moments {
            let order = beta.degree();
            if order < 2 {
                return Err(Violation::JumpOrderTooLow {
                    beta: beta.clone(),
                    order,
                });
            }
            if !mu.degree().at_most(order) {
                return Err(Violation::JumpMomentDegree {
                    beta: beta.clone(),
                    found: mu.degree(),
                    allowed: order,
                });
            }
        }
        Ok(())
    }

    /// Applies `L` to a single monomial `y^alpha`. The jump contribution is
    /// the binomial expansion `sum_{beta <= alpha, |beta| >= 2}
    /// C(alpha, beta) y^(alpha - beta) mu_beta(y)`.
    pub fn apply_to_monomial(&self, alpha: &MultiIndex) -> Result<Polynomial, GeneratorError> {
        if alpha.dim() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                found: alpha.dim(),
            }
            .into());
        }
        let p = Polynomial::monomial(alpha.clone(), 1.0);
        let mut out = Polynomial::zero(self.dim);

        for i in 0..self.dim {
            let dp = p.partial(i)?;
            if !dp.is_zero() && !self.drift[i].is_zero() {
                out = out.add(&self.drift[i].mul(&dp)?)?;
            }
        }
        for i in 0..self.dim {
            let dip = p.partial(i)?;
            if dip.is_zero() {
                continue;
            }
            for j in 0..self.dim {
                let dijp = dip.partial(j)?;
                let a = self.diffusion(i, j);
                if !dijp.is_zero() && !a.is_zero() {
                    out = out.add(&a.mul(&dijp)?.scale(0.5))?;
                }
            }
        }
        for (beta, mu) in &self.jump_moments {
            if !beta.divides(alpha) {
                continue;
            }
            let coeff = alpha.binomial(beta);
            let rest = Polynomial::monomial(alpha.sub(beta), coeff);
            out = out.add(&rest.mul(mu)?)?;
        }

        if let Degree::Finite(out_deg) = out.degree() {
            if out_deg > alpha.degree() {
                return Err(GeneratorError::DegreeIncrease {
                    input: alpha.clone(),
                    input_degree: alpha.degree(),
                    output_degree: out_deg,
                });
            }
        }
        Ok(out)
    }

    /// Applies `L` to a polynomial by linear extension over its monomials.
    pub fn apply(&self, p: &Polynomial) -> Result<Polynomial, GeneratorError> {
        if p.dim() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            }
            .into());
        }
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in p.terms() {
            let image = self.apply_to_monomial(alpha)?;
            out = out.add(&image.scale(c))?;
        }
        Ok(out)
    }
}

/// The matrix `G_k` representing a generator on coefficient vectors up to
/// degree `k`, together with the graded basis it is expressed in.
#[derive(Debug, Clone)]
pub struct DualMatrix {
    basis: GradedBasis,
    matrix: DMatrix<f64>,
}

impl DualMatrix {
    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn truncation(&self) -> u32 {
        self.basis.truncation()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }
}

/// Compiles the dual matrix `G_k`: column `j` is the coefficient vector of
/// `L h_j`. Fails with [`GeneratorError::DegreeIncrease`] when the operator
/// raises the degree of some basis monomial, which signals that the spec is
/// not polynomial.
pub fn build_dual_matrix(spec: &GeneratorSpec, k: u32) -> Result<DualMatrix, GeneratorError> {
    let basis = GradedBasis::new(spec.dim(), k)?;
    let n = basis.len();
    let mut matrix = DMatrix::zeros(n, n);
    for j in 0..n {
        let image = spec.apply_to_monomial(basis.monomial_at(j))?;
        let coeffs = basis.coefficient_vector(&image)?;
        for (i, &c) in coeffs.iter().enumerate() {
            matrix[(i, j)] = c;
        }
    }
    Ok(DualMatrix { basis, matrix })
}

// --- JSON loading ---------------------------------------------------------

/// One monomial term `c * y^alpha` in the wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub c: f64,
}

/// Wire format for a polynomial: a list of terms.
pub type PolyJson = Vec<TermJson>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpJson {
    pub beta: Vec<u32>,
    pub mu: PolyJson,
}

/// Wire format of a generator spec:
/// `{"dim": d, "drift": [poly, ...], "diffusion": [[poly, ...], ...],
///   "jumps": [{"beta": [...], "mu": poly}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpecJson {
    pub dim: usize,
    pub drift: Vec<PolyJson>,
    pub diffusion: Vec<Vec<PolyJson>>,
    #[serde(default)]
    pub jumps: Vec<JumpJson>,
}

pub fn poly_from_json(dim: usize, terms: &PolyJson) -> Result<Polynomial, PolyError> {
    Polynomial::from_terms(
        dim,
        terms
            .iter()
            .map(|t| (MultiIndex::new(t.alpha.clone()), t.c)),
    )
}

pub fn poly_to_json(p: &Polynomial) -> PolyJson {
    p.terms()
        .map(|(alpha, c)| TermJson {
            alpha: alpha.exponents().to_vec(),
            c,
        })
        .collect()
}

impl TryFrom<&GeneratorSpecJson> for GeneratorSpec {
    type Error = GeneratorError;

    fn try_from(json: &GeneratorSpecJson) -> Result<Self, Self::Error> {
        let dim = json.dim;
        let drift = json
            .drift
            .iter()
            .map(|p| poly_from_json(dim, p))
            .collect::<Result<Vec<_>, _>>()?;
        let diffusion = json
            .diffusion
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| poly_from_json(dim, p))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut jumps = BTreeMap::new();
        for j in &json.jumps {
            jumps.insert(MultiIndex::new(j.beta.clone()), poly_from_json(dim, &j.mu)?);
        }
        Ok(GeneratorSpec::with_jumps(dim, drift, diffusion, jumps)?)
    }
}

/// The Jacobi generator with vanishing drift, `Lp(y) = y(1-y) p''(y)`,
/// i.e. `a(y) = 2y(1-y)` as the quadratic form.
pub fn jacobi_spec() -> GeneratorSpec {
    let a = Polynomial::from_terms(
        1,
        [
            (MultiIndex::new(vec![1]), 2.0),
            (MultiIndex::new(vec![2]), -2.0),
        ],
    )
    .unwrap();
    GeneratorSpec::new(1, vec![Polynomial::zero(1)], vec![vec![a]]).unwrap()
}
