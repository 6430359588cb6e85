//! Lyndon words and the basis they index in each homogeneous degree of the
//! free Lie ring.
//!
//! The standard bracketing of a Lyndon word `ℓ` expands to a polynomial whose
//! lexicographically smallest monomial is `ℓ` itself, with coefficient 1.
//! Stacking the expansions for all Lyndon words of one degree therefore gives
//! a matrix that is unitriangular on the Lyndon columns; its Hermite form has
//! pivot 1 at each Lyndon column. Coordinates of a Lie element are read off by
//! substitution down that triangle.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::intlinalg::IntMatrix;
use crate::magnus::{encode_monomial, monomial_count, Homogeneous};
use crate::presentation::Word;
use crate::{Error, Result};

/// All Lyndon words of length exactly `m` over letters `0..n`, sorted
/// lexicographically (Duval's generation order).
pub fn lyndon_words(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 || m == 0 {
        return out;
    }
    let mut w = vec![0usize];
    loop {
        if w.len() == m {
            out.push(w.clone());
        }
        let k = w.len();
        while w.len() < m {
            w.push(w[w.len() - k]);
        }
        while w.last() == Some(&(n - 1)) {
            w.pop();
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

/// Strictly smaller than every proper suffix.
pub fn is_lyndon(w: &[usize]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

fn mobius(mut d: usize) -> i128 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= d {
        if d.is_multiple_of(p) {
            d /= p;
            if d.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if d > 1 {
        result = -result;
    }
    result
}

/// Rank of `γ_m(F)/γ_{m+1}(F)` for `F` free on `n` generators.
pub fn witt_dimension(n: usize, m: usize) -> usize {
    assert!(m >= 1, "degree must be positive");
    let mut total: i128 = 0;
    for d in 1..=m {
        if m.is_multiple_of(d) {
            total += mobius(d) * (n as i128).pow((m / d) as u32);
        }
    }
    usize::try_from(total / m as i128).expect("Witt dimension is nonnegative")
}

/// Splits a Lyndon word of length ≥ 2 as `u·v` with `v` its longest proper
/// Lyndon suffix.
pub fn standard_factorization(w: &[usize]) -> Option<(&[usize], &[usize])> {
    if w.len() < 2 {
        return None;
    }
    (1..w.len())
        .find(|&i| is_lyndon(&w[i..]))
        .map(|i| (&w[..i], &w[i..]))
}

type Sparse = BTreeMap<usize, BigInt>;

fn sparse_bracket(n: usize, a: &Sparse, a_deg: usize, b: &Sparse, b_deg: usize) -> Sparse {
    let mut out = Sparse::new();
    let sa = monomial_count(n, a_deg);
    let sb = monomial_count(n, b_deg);
    for (&i, x) in a {
        for (&j, y) in b {
            *out.entry(i * sb + j).or_insert_with(BigInt::zero) += x * y;
            *out.entry(j * sa + i).or_insert_with(BigInt::zero) -= x * y;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn bracket_rec(n: usize, w: &[usize]) -> (Word, Sparse) {
    match standard_factorization(w) {
        None => {
            let mut e = Sparse::new();
            e.insert(w[0], BigInt::from(1));
            (Word::generator(w[0]), e)
        }
        Some((u, v)) => {
            let (wu, eu) = bracket_rec(n, u);
            let (wv, ev) = bracket_rec(n, v);
            (
                Word::commutator(&wu, &wv),
                sparse_bracket(n, &eu, u.len(), &ev, v.len()),
            )
        }
    }
}

/// Standard bracketing of a Lyndon word, as a group commutator word and as
/// the expansion of the corresponding Lie bracket.
pub fn bracketing(n: usize, w: &[usize]) -> Result<(Word, Homogeneous)> {
    if !is_lyndon(w) || w.iter().any(|&l| l >= n) {
        return Err(Error::NotLyndon);
    }
    let (word, sparse) = bracket_rec(n, w);
    let mut h = Homogeneous::zero(n, w.len());
    for (i, c) in sparse {
        h.coeffs[i] = c;
    }
    Ok((word, h))
}

/// Lyndon basis of one homogeneous degree of the free Lie ring on `n`
/// letters.
#[derive(Clone, Debug)]
pub struct LyndonBasis {
    n: usize,
    m: usize,
    words: Vec<Vec<usize>>,
    codes: Vec<usize>,
    expansions: Vec<Vec<(usize, BigInt)>>,
}

impl LyndonBasis {
    pub fn new(n: usize, m: usize) -> Self {
        let words = lyndon_words(n, m);
        let codes = words.iter().map(|w| encode_monomial(n, w)).collect();
        let expansions = words
            .iter()
            .map(|w| bracket_rec(n, w).1.into_iter().collect())
            .collect();
        LyndonBasis {
            n,
            m,
            words,
            codes,
            expansions,
        }
    }

    pub fn letters(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    /// Expansion of the standard bracketing of `words()[j]` as a tensor.
    pub fn expansion(&self, j: usize) -> Homogeneous {
        let mut h = Homogeneous::zero(self.n, self.m);
        for (i, c) in &self.expansions[j] {
            h.coeffs[*i] = c.clone();
        }
        h
    }

    /// One row per basis word, one column per monomial.
    pub fn expansion_matrix(&self) -> IntMatrix {
        let cols = monomial_count(self.n, self.m);
        IntMatrix::from_rows(
            cols,
            (0..self.len()).map(|j| self.expansion(j).coeffs).collect(),
        )
    }

    /// Integer coordinates of `t` in this basis, or `None` when `t` is not in
    /// the integer span of the bracket expansions.
    pub fn lie_coordinates(&self, t: &Homogeneous) -> Result<Option<Vec<BigInt>>> {
        if t.n != self.n || t.degree != self.m {
            return Err(Error::DimensionMismatch {
                expected: monomial_count(self.n, self.m),
                found: t.coeffs.len(),
            });
        }
        let mut residue = t.coeffs.clone();
        let mut coords = Vec::with_capacity(self.len());
        for (j, &code) in self.codes.iter().enumerate() {
            let c = residue[code].clone();
            if !c.is_zero() {
                for (i, e) in &self.expansions[j] {
                    residue[*i] -= &c * e;
                }
            }
            coords.push(c);
        }
        if residue.iter().all(Zero::is_zero) {
            Ok(Some(coords))
        } else {
            Ok(None)
        }
    }
}

/// Display name of letter `i`: `a`, `b`, ….
pub fn letter_char(i: usize) -> char {
    (b'a' + (i % 26) as u8) as char
}

pub fn word_string(w: &[usize]) -> String {
    w.iter().map(|&l| letter_char(l)).collect()
}

/// Renders a standard bracketing as nested brackets, e.g. `[a,[a,b]]`.
pub fn bracket_string(w: &[usize]) -> String {
    match standard_factorization(w) {
        None => word_string(w),
        Some((u, v)) => format!("[{},{}]", bracket_string(u), bracket_string(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::{hnf, leading_index, rank};
    use num_traits::One;

    // Brute force: every word of length m, kept if strictly smaller than all
    // its proper rotations.
    fn brute_lyndon(n: usize, m: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for code in 0..monomial_count(n, m) {
            let w = crate::magnus::decode_monomial(n, m, code);
            let rotations_larger = (1..m).all(|r| {
                let mut rot = w[r..].to_vec();
                rot.extend(&w[..r]);
                w < rot
            });
            if rotations_larger {
                out.push(w);
            }
        }
        out
    }

    #[test]
    fn small_word_lists() {
        assert_eq!(lyndon_words(2, 2), vec![vec![0, 1]]);
        assert_eq!(lyndon_words(2, 3), vec![vec![0, 0, 1], vec![0, 1, 1]]);
        assert!(lyndon_words(1, 2).is_empty());
        assert_eq!(lyndon_words(2, 1), vec![vec![0], vec![1]]);
        assert_eq!(
            lyndon_words(2, 4),
            vec![vec![0, 0, 0, 1], vec![0, 0, 1, 1], vec![0, 1, 1, 1]]
        );
    }

    #[test]
    fn generation_matches_brute_force() {
        for n in 1..=4 {
            for m in 1..=5 {
                assert_eq!(lyndon_words(n, m), brute_lyndon(n, m), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn witt_values() {
        assert_eq!(witt_dimension(2, 1), 2);
        assert_eq!(witt_dimension(2, 4), 3);
        assert_eq!(witt_dimension(3, 3), 8);
        for n in 1..=4 {
            for m in 1..=6 {
                assert_eq!(
                    witt_dimension(n, m),
                    lyndon_words(n, m).len(),
                    "n={n} m={m}"
                );
            }
        }
    }

    #[test]
    fn bracketing_examples() {
        let (w, e) = bracketing(2, &[0, 1]).unwrap();
        assert_eq!(
            w,
            Word::commutator(&Word::generator(0), &Word::generator(1))
        );
        assert_eq!(
            e,
            Homogeneous::from_terms(2, 2, &[(&[0, 1], 1), (&[1, 0], -1)])
        );
        let (w, e) = bracketing(2, &[0]).unwrap();
        assert_eq!(w, Word::generator(0));
        assert_eq!(e, Homogeneous::from_terms(2, 1, &[(&[0], 1)]));
        assert_eq!(
            standard_factorization(&[0, 0, 1]),
            Some((&[0][..], &[0, 1][..]))
        );
        assert_eq!(bracket_string(&[0, 0, 1]), "[a,[a,b]]");
        let (w, _) = bracketing(2, &[0, 0, 1]).unwrap();
        let ab = Word::commutator(&Word::generator(0), &Word::generator(1));
        assert_eq!(w, Word::commutator(&Word::generator(0), &ab));
        assert!(matches!(bracketing(2, &[1, 0]), Err(Error::NotLyndon)));
    }

    #[test]
    fn coordinates_examples() {
        let basis = LyndonBasis::new(2, 2);
        let lie = Homogeneous::from_terms(2, 2, &[(&[0, 1], 1), (&[1, 0], -1)]);
        assert_eq!(
            basis.lie_coordinates(&lie).unwrap(),
            Some(vec![BigInt::one()])
        );
        let sym = Homogeneous::from_terms(2, 2, &[(&[0, 1], 1), (&[1, 0], 1)]);
        assert_eq!(basis.lie_coordinates(&sym).unwrap(), None);
        assert_eq!(
            basis.lie_coordinates(&lie.scaled(2)).unwrap(),
            Some(vec![BigInt::from(2)])
        );
        let wrong = Homogeneous::zero(2, 3);
        assert!(basis.lie_coordinates(&wrong).is_err());
    }

    #[test]
    fn expansions_are_unitriangular_and_independent() {
        for n in 1..=3 {
            for m in 1..=5 {
                let basis = LyndonBasis::new(n, m);
                let mat = basis.expansion_matrix();
                assert_eq!(rank(&mat), basis.len());
                for (j, w) in basis.words().iter().enumerate() {
                    let row = mat.row(j);
                    let code = encode_monomial(n, w);
                    assert_eq!(leading_index(row), Some(code));
                    assert!(row[code].is_one());
                }
            }
        }
    }

    #[test]
    fn hermite_form_has_unit_pivots_at_lyndon_columns() {
        for (n, m) in [(2, 4), (3, 3), (2, 5)] {
            let basis = LyndonBasis::new(n, m);
            let (h, _) = hnf(&basis.expansion_matrix());
            for (j, w) in basis.words().iter().enumerate() {
                let p = leading_index(h.row(j)).unwrap();
                assert_eq!(p, encode_monomial(n, w));
                assert!(h.row(j)[p].is_one());
            }
        }
    }
}
