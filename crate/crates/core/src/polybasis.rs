//! Multi-index enumeration and polynomial arithmetic in `d` real variables.
//!
//! Polynomials are stored as sparse maps from exponent vectors to
//! double-precision coefficients, in canonical form (no explicit zeros), and
//! bases of the space of polynomials up to a fixed total degree are enumerated
//! in graded-lexicographic order: lower total degree first, and within a
//! degree the variable with the smaller index carries the larger exponent
//! first, so `(2,0)` precedes `(1,1)` precedes `(0,2)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("polynomial of degree {degree} exceeds basis truncation {truncation}")]
    DegreeOutOfRange { degree: u32, truncation: u32 },
}

/// Exponent vector of a monomial `y^alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    /// The zero multi-index (constant monomial) in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit multi-index `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Component-wise `alpha <= beta`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Component-wise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Component-wise difference; caller guarantees `other.divides(self)`.
    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Evaluates the monomial `y^alpha` at a point.
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(y)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }

    /// Product of binomial coefficients `prod_i C(alpha_i, beta_i)`.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| binomial(a, b))
            .product()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

impl Ord for MultiIndex {
    /// Graded-lexicographic order matching the basis enumeration: compare
    /// total degrees first; within a degree the index whose leading entries
    /// are larger comes first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Total degree of a polynomial; the zero polynomial has degree minus
/// infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    MinusInfinity,
    Finite(u32),
}

impl Degree {
    pub fn at_most(self, bound: u32) -> bool {
        match self {
            Degree::MinusInfinity => true,
            Degree::Finite(d) => d <= bound,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::MinusInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Enumerates the monomial basis of polynomials in `dim` variables up to
/// total degree `max_degree`, in graded-lexicographic order. The list has
/// exactly `C(dim + max_degree, dim)` entries.
pub fn enumerate_basis(dim: usize, max_degree: u32) -> Result<Vec<MultiIndex>, PolyError> {
    if dim == 0 {
        return Err(PolyError::ZeroDimension);
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    for degree in 0..=max_degree {
        emit_degree(&mut out, &mut current, 0, degree);
    }
    Ok(out)
}

fn emit_degree(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        emit_degree(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// Sparse polynomial with real coefficients, canonical form: no stored zero
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(dim);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    /// Single monomial `c * y^alpha`.
    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Polynomial::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Polynomial::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(PolyError::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// Accumulates `c * y^alpha`, pruning exact zeros to keep the canonical
    /// form (threshold is exactly 0.0, never an epsilon).
    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        debug_assert_eq!(alpha.dim(), self.dim);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|a| a.degree())
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (alpha, c) in other.terms() {
            out.add_term(alpha.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, &c)| (a.clone(), c * s))
                .collect(),
        }
    }

    /// Exact coefficient convolution.
    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other)?;
        let mut out = Polynomial::zero(self.dim);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.add(b), ca * cb);
            }
        }
        Ok(out)
    }

    /// Symbolic partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Result<Polynomial, PolyError> {
        if i >= self.dim {
            return Err(PolyError::IndexOutOfRange {
                index: i,
                dim: self.dim,
            });
        }
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in self.terms() {
            let e = alpha.exponent(i);
            if e == 0 {
                continue;
            }
            let mut exps = alpha.exponents().to_vec();
            exps[i] = e - 1;
            out.add_term(MultiIndex::new(exps), c * e as f64);
        }
        Ok(out)
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64, PolyError> {
        if y.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                found: y.len(),
            });
        }
        Ok(self.terms().map(|(alpha, c)| c * alpha.eval(y)).sum())
    }

    fn check_dim(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.dim != other.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// Graded monomial basis of polynomials up to a fixed truncation degree,
/// with positional lookup.
#[derive(Debug, Clone)]
pub struct GradedBasis {
    dim: usize,
    truncation: u32,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl GradedBasis {
    pub fn new(dim: usize, truncation: u32) -> Result<Self, PolyError> {
        let indices = enumerate_basis(dim, truncation)?;
        let positions = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(GradedBasis {
            dim,
            truncation,
            indices,
            positions,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn monomial_at(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }

    /// Evaluates the basis vector `H(y) = (h_1(y), ..., h_N(y))`.
    pub fn eval_at(&self, y: &[f64]) -> Result<Vec<f64>, PolyError> {
        if y.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                found: y.len(),
            });
        }
        Ok(self.indices.iter().map(|a| a.eval(y)).collect())
    }

    /// Coefficient vector of `p` in this basis; fails if `p` has terms above
    /// the truncation degree.
    pub fn coefficient_vector(&self, p: &Polynomial) -> Result<Vec<f64>, PolyError> {
        if p.dim() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        let mut out = vec![0.0; self.len()];
        for (alpha, c) in p.terms() {
            match self.position(alpha) {
                Some(i) => out[i] = c,
                None => {
                    return Err(PolyError::DegreeOutOfRange {
                        degree: alpha.degree(),
                        truncation: self.truncation,
                    })
                }
            }
        }
        Ok(out)
    }

    /// Polynomial with the given coefficient vector.
    pub fn polynomial(&self, coeffs: &[f64]) -> Result<Polynomial, PolyError> {
        if coeffs.len() != self.len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        Polynomial::from_terms(
            self.dim,
            self.indices
                .iter()
                .zip(coeffs)
                .map(|(a, &c)| (a.clone(), c)),
        )
    }
}
