//! Moment formulas in finite dimensions.
//!
//! Conditional moments of a polynomial process solve a linear ODE system on
//! coefficient vectors: `E[p(lambda_T) | lambda_0 = y] = H(y)^T e^(T G_k) a`
//! where `a` is the coefficient vector of `p`. The adjoint route propagates
//! the moment vector itself forward: `E[H(lambda_T) | lambda_0] =
//! e^(T G_k^T) H(lambda_0)`. Both reduce to a dense matrix exponential,
//! computed by Pade approximation with scaling and squaring. Pade(13) is used
//! at the top of the ladder because the dual matrices are typically
//! non-normal (the Jacobi matrix is bidiagonal with a repeated zero
//! eigenvalue), which rules out eigendecompositions.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::generator::{build_dual_matrix, DualMatrix, GeneratorError, GeneratorSpec};
use crate::polybasis::PolyError;

#[derive(Debug, Error)]
pub enum MomentsError {
    #[error("matrix exponential requires a square matrix, got {rows} x {cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("time horizon must be non-negative, got {0}")]
    NegativeHorizon(f64),
    #[error("coefficient vector has length {found}, basis has {expected}")]
    CoeffLength { expected: usize, found: usize },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Coefficient vector aligned with the graded basis of degree `truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    pub truncation: u32,
    pub values: Vec<f64>,
}

impl CoeffVector {
    /// Coefficient vector of `p` in the graded basis of degree `truncation`.
    pub fn of_polynomial(
        p: &crate::polybasis::Polynomial,
        truncation: u32,
    ) -> Result<Self, MomentsError> {
        let basis = crate::polybasis::GradedBasis::new(p.dim(), truncation)?;
        Ok(CoeffVector {
            truncation,
            values: basis.coefficient_vector(p)?,
        })
    }
}

/// Moment vector `(1, E[h_2(lambda_T)], ..., E[h_N(lambda_T)])` aligned with
/// the graded basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub truncation: u32,
    pub values: Vec<f64>,
}

// Pade numerator coefficients for degrees 3, 5, 7, 9, 13, and the 1-norm
// thresholds below which each degree meets double-precision backward error.
const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Evaluates `U = A * (odd part)`, `V = even part` for a low-order Pade
/// approximant with coefficients `b`, given precomputed even powers of `A`.
fn pade_uv(
    a: &DMatrix<f64>,
    even_powers: &[&DMatrix<f64>],
    b: &[f64],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut odd = &eye * b[1];
    let mut even = &eye * b[0];
    for (i, &p) in even_powers.iter().enumerate() {
        odd += p * b[2 * i + 3];
        even += p * b[2 * i + 2];
    }
    (a * odd, even)
}

/// Matrix exponential `exp(t A)` by Pade approximation with scaling and
/// squaring.
pub fn expm(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>, MomentsError> {
    if a.nrows() != a.ncols() {
        return Err(MomentsError::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) || !t.is_finite() {
        return Err(MomentsError::NonFinite);
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let at = a * t;
    let norm = one_norm(&at);

    let a2 = &at * &at;
    let (u, v, squarings) = if norm <= THETA_9 {
        let a4 = &a2 * &a2;
        let (u, v) = if norm <= THETA_3 {
            pade_uv(&at, &[&a2], &B3)
        } else if norm <= THETA_5 {
            pade_uv(&at, &[&a2, &a4], &B5)
        } else {
            let a6 = &a4 * &a2;
            if norm <= THETA_7 {
                pade_uv(&at, &[&a2, &a4, &a6], &B7)
            } else {
                let a8 = &a6 * &a2;
                pade_uv(&at, &[&a2, &a4, &a6, &a8], &B9)
            }
        };
        (u, v, 0u32)
    } else {
        let s = ((norm / THETA_13).log2().ceil() as i32).max(0) as u32;
        let scale = 2f64.powi(-(s as i32));
        let at_s = &at * scale;
        let a2 = &at_s * &at_s;
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let eye = DMatrix::<f64>::identity(n, n);
        let w1 = &a6 * B13[13] + &a4 * B13[11] + &a2 * B13[9];
        let w2 = &a6 * B13[7] + &a4 * B13[5] + &a2 * B13[3] + &eye * B13[1];
        let u = &at_s * (&a6 * w1 + w2);
        let z1 = &a6 * B13[12] + &a4 * B13[10] + &a2 * B13[8];
        let v = &a6 * z1 + &a6 * B13[6] + &a4 * B13[4] + &a2 * B13[2] + &eye * B13[0];
        (u, v, s)
    };

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(MomentsError::NonFinite)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// `E[p(lambda_T) | lambda_0 = y] = H(y)^T e^(T G_k) a` for the polynomial
/// with coefficient vector `a` in the graded basis of degree `k`.
pub fn conditional_moment(
    spec: &GeneratorSpec,
    k: u32,
    coeffs: &[f64],
    y: &[f64],
    horizon: f64,
) -> Result<f64, MomentsError> {
    let dual = build_dual_matrix(spec, k)?;
    conditional_moment_with(&dual, coeffs, y, horizon)
}

/// Same as [`conditional_moment`] but reusing a prebuilt dual matrix.
pub fn conditional_moment_with(
    dual: &DualMatrix,
    coeffs: &[f64],
    y: &[f64],
    horizon: f64,
) -> Result<f64, MomentsError> {
    if horizon < 0.0 {
        return Err(MomentsError::NegativeHorizon(horizon));
    }
    if coeffs.len() != dual.size() {
        return Err(MomentsError::CoeffLength {
            expected: dual.size(),
            found: coeffs.len(),
        });
    }
    let propagated = expm(dual.matrix(), horizon)?;
    let h = dual.basis().eval_at(y)?;
    let mut acc = 0.0;
    for i in 0..dual.size() {
        let mut row = 0.0;
        for (j, &c) in coeffs.iter().enumerate() {
            row += propagated[(i, j)] * c;
        }
        acc += h[i] * row;
    }
    Ok(acc)
}

/// Bidual route: `E[H(lambda_T) | lambda_0 = y0] = e^(T G_k^T) H(y0)`.
pub fn moment_vector(
    spec: &GeneratorSpec,
    k: u32,
    y0: &[f64],
    horizon: f64,
) -> Result<MomentVector, MomentsError> {
    let dual = build_dual_matrix(spec, k)?;
    moment_vector_with(&dual, y0, horizon)
}

/// Same as [`moment_vector`] but reusing a prebuilt dual matrix.
pub fn moment_vector_with(
    dual: &DualMatrix,
    y0: &[f64],
    horizon: f64,
) -> Result<MomentVector, MomentsError> {
    if horizon < 0.0 {
        return Err(MomentsError::NegativeHorizon(horizon));
    }
    let propagated = expm(&dual.matrix().transpose(), horizon)?;
    let h = dual.basis().eval_at(y0)?;
    let n = dual.size();
    let mut values = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for (j, &hj) in h.iter().enumerate() {
            acc += propagated[(i, j)] * hj;
        }
        values[i] = acc;
    }
    Ok(MomentVector {
        truncation: dual.truncation(),
        values,
    })
}
