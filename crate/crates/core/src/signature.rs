//! Truncated tensor algebra and the expected signature of Brownian motion.
//!
//! Elements of `T^N(R^d)` are stored as one dense level-`n` array of size
//! `d^n` per level, indexed by words over `{1, ..., d}` in row-major order:
//! the word `(i_1, ..., i_n)` maps to the flat index
//! `sum_j (i_j - 1) d^(n-j)`. The signature of a piecewise-linear path is a
//! Chen fold of segment exponentials; its expectation for Brownian motion is
//! `exp(t/2 sum_i e_i (x) e_i)` truncated at level `N`, reproduced
//! independently through the nilpotent dual operator `L_1` that halves and
//! strips trailing repeated letters.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("tensor shape mismatch: ({dim_a}, {levels_a}) vs ({dim_b}, {levels_b})")]
    ShapeMismatch {
        dim_a: usize,
        levels_a: usize,
        dim_b: usize,
        levels_b: usize,
    },
    #[error("path needs at least two points")]
    PathTooShort,
    #[error("point dimension {found} does not match alphabet size {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("word of length {len} exceeds truncation level {max}")]
    WordTooLong { len: usize, max: usize },
    #[error("letter {letter} outside alphabet {{1, ..., {dim}}}")]
    LetterOutOfRange { letter: u8, dim: usize },
}

/// A word over the alphabet `{1, ..., d}`, indexing a tensor basis element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Flat row-major index of this word at its own level.
    pub fn flat_index(&self, dim: usize) -> Result<usize, SignatureError> {
        let mut idx = 0usize;
        for &letter in &self.0 {
            if letter == 0 || letter as usize > dim {
                return Err(SignatureError::LetterOutOfRange { letter, dim });
            }
            idx = idx * dim + (letter as usize - 1);
        }
        Ok(idx)
    }

    /// Parses a word like "1122" (alphabet sizes up to 9).
    pub fn parse(text: &str) -> Option<Word> {
        let mut letters = Vec::with_capacity(text.len());
        for ch in text.chars() {
            let digit = ch.to_digit(10)?;
            if digit == 0 {
                return None;
            }
            letters.push(digit as u8);
        }
        Some(Word(letters))
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &letter in &self.0 {
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

/// Element of the truncated tensor algebra `T^N(R^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

impl TruncatedTensor {
    /// The zero tensor.
    pub fn zero(dim: usize, max_level: usize) -> Self {
        let levels = (0..=max_level)
            .map(|n| vec![0.0; dim.pow(n as u32)])
            .collect();
        TruncatedTensor { dim, levels }
    }

    /// The multiplicative unit: 1 at level zero.
    pub fn unit(dim: usize, max_level: usize) -> Self {
        let mut t = Self::zero(dim, max_level);
        t.levels[0][0] = 1.0;
        t
    }

    /// Basis word tensor with a single coefficient 1.
    pub fn from_word(word: &Word, dim: usize, max_level: usize) -> Result<Self, SignatureError> {
        if word.len() > max_level {
            return Err(SignatureError::WordTooLong {
                len: word.len(),
                max: max_level,
            });
        }
        let mut t = Self::zero(dim, max_level);
        let idx = word.flat_index(dim)?;
        t.levels[word.len()][idx] = 1.0;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.levels[n]
    }

    /// Coefficient of a basis word.
    pub fn coefficient(&self, word: &Word) -> Result<f64, SignatureError> {
        if word.len() > self.max_level() {
            return Err(SignatureError::WordTooLong {
                len: word.len(),
                max: self.max_level(),
            });
        }
        Ok(self.levels[word.len()][word.flat_index(self.dim)?])
    }

    pub fn scale(&self, s: f64) -> Self {
        TruncatedTensor {
            dim: self.dim,
            levels: self
                .levels
                .iter()
                .map(|lvl| lvl.iter().map(|x| x * s).collect())
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &TruncatedTensor, scale: f64) {
        debug_assert_eq!(self.dim, other.dim);
        debug_assert_eq!(self.levels.len(), other.levels.len());
        for (mine, theirs) in self.levels.iter_mut().zip(&other.levels) {
            for (x, y) in mine.iter_mut().zip(theirs) {
                *x += scale * y;
            }
        }
    }

    pub fn max_abs_difference(&self, other: &TruncatedTensor) -> f64 {
        self.levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn same_shape(&self, other: &TruncatedTensor) -> Result<(), SignatureError> {
        if self.dim != other.dim || self.levels.len() != other.levels.len() {
            return Err(SignatureError::ShapeMismatch {
                dim_a: self.dim,
                levels_a: self.max_level(),
                dim_b: other.dim,
                levels_b: other.max_level(),
            });
        }
        Ok(())
    }
}

/// Concatenation product in `T^N(R^d)`: `(uv)_n = sum_{a+b=n} u_a (x) v_b`,
/// levels above the truncation discarded.
pub fn tensor_product(
    u: &TruncatedTensor,
    v: &TruncatedTensor,
) -> Result<TruncatedTensor, SignatureError> {
    u.same_shape(v)?;
    let d = u.dim();
    let max_level = u.max_level();
    let mut out = TruncatedTensor::zero(d, max_level);
    for n in 0..=max_level {
        let size_b_stride = |b: usize| d.pow(b as u32);
        for a in 0..=n {
            let b = n - a;
            let ua = u.level(a);
            let vb = v.level(b);
            let stride = size_b_stride(b);
            let target = out.level_mut(n);
            for (i, &x) in ua.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let base = i * stride;
                for (j, &y) in vb.iter().enumerate() {
                    target[base + j] += x * y;
                }
            }
        }
    }
    Ok(out)
}

/// Exponential of a level-1 element: level `n` holds `v^(x)n / n!`. This is
/// the signature of a single straight segment with increment `v`.
pub fn tensor_exp(v: &[f64], max_level: usize) -> TruncatedTensor {
    let d = v.len();
    let mut out = TruncatedTensor::zero(d, max_level);
    out.level_mut(0)[0] = 1.0;
    for n in 1..=max_level {
        let inv_n = 1.0 / n as f64;
        let (head, tail) = out.levels.split_at_mut(n);
        let prev = &head[n - 1];
        let cur = &mut tail[0];
        for (i, &p) in prev.iter().enumerate() {
            let x = p * inv_n;
            if x == 0.0 {
                continue;
            }
            let base = i * d;
            for (j, &vj) in v.iter().enumerate() {
                cur[base + j] = x * vj;
            }
        }
    }
    out
}

/// Signature of the piecewise-linear path through the given points: the Chen
/// fold of segment exponentials.
pub fn chen_signature(
    path: &[Vec<f64>],
    max_level: usize,
) -> Result<TruncatedTensor, SignatureError> {
    if path.len() < 2 {
        return Err(SignatureError::PathTooShort);
    }
    let d = path[0].len();
    for point in path {
        if point.len() != d {
            return Err(SignatureError::PointDimension {
                expected: d,
                found: point.len(),
            });
        }
    }
    let mut sig = TruncatedTensor::unit(d, max_level);
    let mut increment = vec![0.0; d];
    for pair in path.windows(2) {
        for (k, inc) in increment.iter_mut().enumerate() {
            *inc = pair[1][k] - pair[0][k];
        }
        sig = tensor_product(&sig, &tensor_exp(&increment, max_level))?;
    }
    Ok(sig)
}

/// Expected signature of `d`-dimensional Brownian motion at time `t`,
/// truncated at `max_level`: level `2k` holds
/// `(t/2)^k / k! (sum_i e_i (x) e_i)^(x)k`, odd levels vanish.
pub fn expected_signature_bm(dim: usize, max_level: usize, t: f64) -> TruncatedTensor {
    let mut casimir = TruncatedTensor::zero(dim, max_level);
    if max_level >= 2 {
        let lvl2 = casimir.level_mut(2);
        for i in 0..dim {
            lvl2[i * dim + i] = 1.0;
        }
    }
    let mut out = TruncatedTensor::unit(dim, max_level);
    let mut power = TruncatedTensor::unit(dim, max_level);
    let mut factor = 1.0;
    for k in 1..=(max_level / 2) {
        power = tensor_product(&power, &casimir).expect("shapes match");
        factor *= 0.5 * t / k as f64;
        out.add_assign(&power, factor);
    }
    out
}

/// The dual operator `L_1`: on a basis word of length `n >= 2` it yields half
/// the word with its last two letters removed when those letters agree, and
/// zero otherwise; linear extension over a tensor.
pub fn dual_l1_apply(a: &TruncatedTensor) -> TruncatedTensor {
    let d = a.dim();
    let mut out = TruncatedTensor::zero(d, a.max_level());
    for n in 2..=a.max_level() {
        let src = a.level(n);
        let dst = out.level_mut(n - 2);
        let block = d * d;
        for (base, target) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in 0..d {
                acc += src[base * block + p * d + p];
            }
            *target += 0.5 * acc;
        }
    }
    out
}

/// `exp(t L_1)` as the finite sum `sum_l t^l / l! L_1^l`; exact because `L_1`
/// lowers the level by two and is therefore nilpotent on the truncation.
pub fn expm_l1(a: &TruncatedTensor, t: f64) -> TruncatedTensor {
    let mut out = a.clone();
    let mut power = a.clone();
    let mut factor = 1.0;
    for l in 1..=(a.max_level() / 2 + 1) {
        power = dual_l1_apply(&power);
        factor *= t / l as f64;
        out.add_assign(&power, factor);
    }
    out
}

/// Expected coefficient of a signature word for Brownian motion at time `t`,
/// through the dual route: the empty-word coefficient of `exp(t L_1)` applied
/// to the word.
pub fn expected_word_coefficient(
    word: &Word,
    max_level: usize,
    t: f64,
) -> Result<f64, SignatureError> {
    if word.len() > max_level {
        return Err(SignatureError::WordTooLong {
            len: word.len(),
            max: max_level,
        });
    }
    let dim = word.0.iter().copied().max().unwrap_or(1) as usize;
    let delta = TruncatedTensor::from_word(word, dim, word.len().max(1))?;
    let propagated = expm_l1(&delta, t);
    Ok(propagated.level(0)[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn word(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    #[test]
    fn unit_is_the_identity_of_the_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v = TruncatedTensor::zero(2, 3);
        for n in 0..=3 {
            for x in v.level_mut(n) {
                *x = rng.gen_range(-1.0..1.0);
            }
        }
        let unit = TruncatedTensor::unit(2, 3);
        assert_eq!(tensor_product(&unit, &v).unwrap(), v);
        assert_eq!(tensor_product(&v, &unit).unwrap(), v);
    }

    #[test]
    fn letters_concatenate() {
        let e1 = TruncatedTensor::from_word(&word("1"), 2, 2).unwrap();
        let e2 = TruncatedTensor::from_word(&word("2"), 2, 2).unwrap();
        let prod = tensor_product(&e1, &e2).unwrap();
        assert_eq!(prod.coefficient(&word("12")).unwrap(), 1.0);
        assert_eq!(prod.coefficient(&word("21")).unwrap(), 0.0);
    }

    #[test]
    fn product_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let mut tensors = Vec::new();
            for _ in 0..3 {
                let mut v = TruncatedTensor::zero(2, 4);
                for n in 0..=4 {
                    for x in v.level_mut(n) {
                        *x = rng.gen_range(-1.0..1.0);
                    }
                }
                tensors.push(v);
            }
            let left = tensor_product(
                &tensor_product(&tensors[0], &tensors[1]).unwrap(),
                &tensors[2],
            )
            .unwrap();
            let right = tensor_product(
                &tensors[0],
                &tensor_product(&tensors[1], &tensors[2]).unwrap(),
            )
            .unwrap();
            assert!(left.max_abs_difference(&right) < 1e-12);
        }
    }

    #[test]
    fn exp_of_zero_is_unit() {
        assert_eq!(tensor_exp(&[0.0, 0.0], 3), TruncatedTensor::unit(2, 3));
    }

    #[test]
    fn scalar_exponential_truncation() {
        let e = tensor_exp(&[2.0], 3);
        assert_eq!(e.level(0), &[1.0]);
        assert_eq!(e.level(1), &[2.0]);
        assert_eq!(e.level(2), &[2.0]);
        assert!((e.level(3)[0] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exp_times_exp_of_negation_is_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let prod = tensor_product(&tensor_exp(&v, 5), &tensor_exp(&neg, 5)).unwrap();
            assert!(prod.max_abs_difference(&TruncatedTensor::unit(3, 5)) < 1e-12);
        }
    }

    #[test]
    fn single_segment_signature_is_the_exponential() {
        let path = vec![vec![0.0, 0.0], vec![0.5, -1.0]];
        let sig = chen_signature(&path, 3).unwrap();
        let expected = tensor_exp(&[0.5, -1.0], 3);
        assert!(sig.max_abs_difference(&expected) < 1e-15);
        // Level 2 equals v (x) v / 2: coefficient of word 12 is v1 v2 / 2.
        let v1_v2_half = -0.25;
        assert!((sig.coefficient(&word("12")).unwrap() - v1_v2_half).abs() < 1e-15);
    }

    #[test]
    fn constant_path_has_unit_signature() {
        let path = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]];
        let sig = chen_signature(&path, 4).unwrap();
        assert!(sig.max_abs_difference(&TruncatedTensor::unit(2, 4)) < 1e-15);
    }

    #[test]
    fn two_segment_level_two_cross_word() {
        let v = [0.3, -0.7];
        let w = [1.1, 0.4];
        let path = vec![
            vec![0.0, 0.0],
            vec![v[0], v[1]],
            vec![v[0] + w[0], v[1] + w[1]],
        ];
        let sig = chen_signature(&path, 2).unwrap();
        let expected = v[0] * v[1] / 2.0 + w[0] * w[1] / 2.0 + v[0] * w[1];
        assert!((sig.coefficient(&word("12")).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn chen_identity_on_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = rng.gen_range(1..=3);
            let n1 = rng.gen_range(2..=5);
            let n2 = rng.gen_range(2..=5);
            let mut first = vec![vec![0.0; d]];
            for _ in 1..n1 {
                let last = first.last().unwrap().clone();
                first.push(last.iter().map(|x| x + rng.gen_range(-0.5..0.5)).collect());
            }
            let mut second = vec![first.last().unwrap().clone()];
            for _ in 1..n2 {
                let last = second.last().unwrap().clone();
                second.push(last.iter().map(|x| x + rng.gen_range(-0.5..0.5)).collect());
            }
            let mut whole = first.clone();
            whole.extend(second.iter().skip(1).cloned());
            let sig_whole = chen_signature(&whole, 4).unwrap();
            let sig_split = tensor_product(
                &chen_signature(&first, 4).unwrap(),
                &chen_signature(&second, 4).unwrap(),
            )
            .unwrap();
            assert!(sig_whole.max_abs_difference(&sig_split) < 1e-12);
        }
    }

    #[test]
    fn level_two_symmetric_part_is_the_square_of_level_one() {
        // Group-like relation: S1 (x) S1 = S2 + S2^T for any path signature.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let d = 2;
            let mut path = vec![vec![0.0; d]];
            for _ in 0..5 {
                let last = path.last().unwrap().clone();
                path.push(last.iter().map(|x| x + rng.gen_range(-1.0..1.0)).collect());
            }
            let sig = chen_signature(&path, 2).unwrap();
            let s1 = sig.level(1);
            let s2 = sig.level(2);
            for i in 0..d {
                for j in 0..d {
                    let lhs = s1[i] * s1[j];
                    let rhs = s2[i * d + j] + s2[j * d + i];
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn expected_signature_formula_values() {
        let t0 = expected_signature_bm(2, 4, 0.0);
        assert!(t0.max_abs_difference(&TruncatedTensor::unit(2, 4)) < 1e-15);

        let sig = expected_signature_bm(2, 4, 1.0);
        assert_eq!(sig.coefficient(&word("11")).unwrap(), 0.5);
        assert_eq!(sig.coefficient(&word("12")).unwrap(), 0.0);
        assert_eq!(sig.coefficient(&word("1122")).unwrap(), 0.125);
        assert_eq!(sig.coefficient(&word("1212")).unwrap(), 0.0);
        // Odd levels vanish identically.
        assert!(sig.level(1).iter().all(|&x| x == 0.0));
        assert!(sig.level(3).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dual_operator_word_rules() {
        let a = TruncatedTensor::from_word(&word("11"), 2, 2).unwrap();
        let la = dual_l1_apply(&a);
        assert_eq!(la.level(0)[0], 0.5);

        let b = TruncatedTensor::from_word(&word("12"), 2, 2).unwrap();
        assert!(dual_l1_apply(&b).level(0).iter().all(|&x| x == 0.0));

        let c = TruncatedTensor::from_word(&word("1122"), 2, 4).unwrap();
        let lc = dual_l1_apply(&c);
        assert_eq!(lc.coefficient(&word("11")).unwrap(), 0.5);
        assert!(lc.level(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dual_operator_is_nilpotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = TruncatedTensor::zero(2, 5);
        for n in 0..=5 {
            for x in a.level_mut(n) {
                *x = rng.gen_range(-1.0..1.0);
            }
        }
        let mut power = a;
        for _ in 0..(5 / 2 + 1) {
            power = dual_l1_apply(&power);
        }
        assert!(power.levels.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn expm_l1_word_examples() {
        let empty = TruncatedTensor::unit(2, 4);
        assert_eq!(expm_l1(&empty, 3.0), empty);

        let a = TruncatedTensor::from_word(&word("1122"), 2, 4).unwrap();
        let e = expm_l1(&a, 1.0);
        assert_eq!(e.level(0)[0], 0.125);

        let b = TruncatedTensor::from_word(&word("1212"), 2, 4).unwrap();
        assert_eq!(expm_l1(&b, 1.0).level(0)[0], 0.0);
    }

    #[test]
    fn expected_word_coefficient_examples() {
        assert_eq!(
            expected_word_coefficient(&word("121"), 4, 1.0).unwrap(),
            0.0
        );
        assert_eq!(expected_word_coefficient(&word("11"), 4, 2.0).unwrap(), 1.0);
        assert_eq!(
            expected_word_coefficient(&word("2222"), 4, 1.0).unwrap(),
            0.125
        );
        assert!(matches!(
            expected_word_coefficient(&word("11221"), 4, 1.0),
            Err(SignatureError::WordTooLong { .. })
        ));
    }

    #[test]
    fn dual_route_matches_the_closed_formula() {
        // Every word of length <= N, several horizons, both routes.
        for &t in &[0.5, 1.0, 2.0] {
            let formula = expected_signature_bm(2, 6, t);
            for n in 0..=6usize {
                for flat in 0..2usize.pow(n as u32) {
                    let mut letters = Vec::with_capacity(n);
                    let mut rem = flat;
                    for _ in 0..n {
                        letters.push((rem % 2 + 1) as u8);
                        rem /= 2;
                    }
                    letters.reverse();
                    let w = Word(letters);
                    let dual = expected_word_coefficient(&w, 6, t).unwrap();
                    let closed = formula.coefficient(&w).unwrap();
                    assert!(
                        (dual - closed).abs() <= 1e-14,
                        "word {w} at t={t}: {dual} vs {closed}"
                    );
                }
            }
        }
    }
}
