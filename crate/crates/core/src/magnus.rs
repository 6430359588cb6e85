//! Free nilpotent groups `F/γ_{W+1}(F)` via the Magnus embedding.
//!
//! A generator `x_i` maps to `1 + X_i` in the ring of noncommutative integer
//! power series truncated above degree `W`. The kernel of the induced map on
//! `F` is exactly `γ_{W+1}(F)`, so two words are equal in the free nilpotent
//! quotient iff their series agree, and an element lies in `γ_m(F)` (modulo
//! the cap) iff its series has no terms of degree `1..m`.
//!
//! Coefficients are stored densely per degree: a monomial of degree `m` over
//! `n` letters is encoded in base `n` with the first letter most significant,
//! so numeric order inside a degree is lexicographic order.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::presentation::Word;
use crate::{Error, Result};

/// Truncated noncommutative polynomial with integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TruncatedSeries {
    n: usize,
    cap: usize,
    /// `coeffs[m]` has `n^m` entries.
    coeffs: Vec<Vec<BigInt>>,
}

pub fn monomial_count(n: usize, m: usize) -> usize {
    n.pow(m as u32)
}

/// Decodes a monomial index of degree `m` into its letters.
pub fn decode_monomial(n: usize, m: usize, mut code: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for slot in out.iter_mut().rev() {
        *slot = code % n;
        code /= n;
    }
    out
}

pub fn encode_monomial(n: usize, letters: &[usize]) -> usize {
    letters.iter().fold(0, |acc, &l| acc * n + l)
}

impl TruncatedSeries {
    pub fn zero(n: usize, cap: usize) -> Self {
        TruncatedSeries {
            n,
            cap,
            coeffs: (0..=cap)
                .map(|m| vec![BigInt::zero(); monomial_count(n, m)])
                .collect(),
        }
    }

    pub fn one(n: usize, cap: usize) -> Self {
        let mut s = Self::zero(n, cap);
        s.coeffs[0][0] = BigInt::one();
        s
    }

    pub fn letters(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coefficient(&self, monomial: &[usize]) -> BigInt {
        if monomial.len() > self.cap {
            return BigInt::zero();
        }
        self.coeffs[monomial.len()][encode_monomial(self.n, monomial)].clone()
    }

    pub fn set_coefficient(&mut self, monomial: &[usize], value: BigInt) {
        assert!(monomial.len() <= self.cap, "monomial above cap");
        self.coeffs[monomial.len()][encode_monomial(self.n, monomial)] = value;
    }

    pub fn degree_part(&self, m: usize) -> &[BigInt] {
        &self.coeffs[m]
    }

    /// Nonzero terms in length-lexicographic monomial order.
    pub fn terms(&self) -> Vec<(Vec<usize>, BigInt)> {
        let mut out = Vec::new();
        for (m, part) in self.coeffs.iter().enumerate() {
            for (code, c) in part.iter().enumerate() {
                if !c.is_zero() {
                    out.push((decode_monomial(self.n, m, code), c.clone()));
                }
            }
        }
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.cap != other.cap {
            return Err(Error::CapMismatch(self.cap, other.cap));
        }
        if self.n != other.n {
            return Err(Error::AlphabetMismatch {
                index: other.n,
                size: self.n,
            });
        }
        Ok(())
    }

    /// Product with every term of degree above the cap discarded.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n, self.cap);
        let rhs: Vec<Vec<(usize, &BigInt)>> = other
            .coeffs
            .iter()
            .map(|p| p.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect())
            .collect();
        let mut shift = vec![1usize; self.cap + 1];
        for j in 1..=self.cap {
            shift[j] = shift[j - 1] * n;
        }
        for (i, part) in self.coeffs.iter().enumerate() {
            for (a, x) in part.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, terms) in rhs.iter().enumerate().take(self.cap - i + 1) {
                    let dst = &mut out.coeffs[i + j];
                    let base = a * shift[j];
                    for &(b, y) in terms {
                        dst[base + b] += x * y;
                    }
                }
            }
        }
        out
    }

    fn add_scaled(&mut self, other: &Self, k: &BigInt) {
        for (dst, src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for (d, s) in dst.iter_mut().zip(src) {
                if !s.is_zero() {
                    *d += s * k;
                }
            }
        }
    }

    /// Renames letters through `map` into an alphabet of `n` letters. This is
    /// a ring homomorphism, so it carries group elements to group elements.
    pub fn relabel(&self, map: &[usize], n: usize) -> Self {
        let mut out = Self::zero(n, self.cap);
        for (m, part) in self.coeffs.iter().enumerate() {
            for (code, c) in part.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let letters: Vec<usize> = decode_monomial(self.n, m, code)
                    .into_iter()
                    .map(|l| map[l])
                    .collect();
                out.coeffs[m][encode_monomial(n, &letters)] = c.clone();
            }
        }
        out
    }

    fn is_one(&self) -> bool {
        self.coeffs[0][0].is_one() && self.coeffs[1..].iter().flatten().all(Zero::is_zero)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (mono, c)) in terms.iter().enumerate() {
            let name: String = mono.iter().map(|&l| letter_name(l)).collect();
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{name}")?,
                (false, false) => write!(f, "{mag}{name}")?,
            }
        }
        Ok(())
    }
}

fn letter_name(l: usize) -> String {
    if l < 26 {
        ((b'A' + l as u8) as char).to_string()
    } else {
        format!("X{l}")
    }
}

/// Homogeneous component of one degree, as a dense coefficient tensor.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Homogeneous {
    pub n: usize,
    pub degree: usize,
    pub coeffs: Vec<BigInt>,
}

impl Homogeneous {
    pub fn zero(n: usize, degree: usize) -> Self {
        Homogeneous {
            n,
            degree,
            coeffs: vec![BigInt::zero(); monomial_count(n, degree)],
        }
    }

    /// Tensor from `(monomial, coefficient)` pairs.
    pub fn from_terms(n: usize, degree: usize, terms: &[(&[usize], i64)]) -> Self {
        let mut h = Self::zero(n, degree);
        for (mono, c) in terms {
            assert_eq!(mono.len(), degree);
            h.coeffs[encode_monomial(n, mono)] += BigInt::from(*c);
        }
        h
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scaled(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        Homogeneous {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * &k).collect(),
        }
    }
}

/// Element of the free nilpotent group `F/γ_{W+1}(F)`: a truncated series
/// with constant term 1.
#[derive(Clone, Debug)]
pub struct GroupElement {
    series: TruncatedSeries,
    word: Option<Word>,
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.series == other.series
    }
}

impl Eq for GroupElement {}

impl std::hash::Hash for GroupElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.series.hash(state)
    }
}

impl GroupElement {
    pub fn identity(n: usize, cap: usize) -> Self {
        GroupElement {
            series: TruncatedSeries::one(n, cap),
            word: Some(Word::identity()),
        }
    }

    /// `1 + X_i`.
    pub fn generator(n: usize, cap: usize, i: usize) -> Self {
        let mut s = TruncatedSeries::one(n, cap);
        if cap >= 1 {
            s.coeffs[1][i] = BigInt::one();
        }
        GroupElement {
            series: s,
            word: Some(Word::generator(i)),
        }
    }

    /// Image of a word under the Magnus embedding.
    pub fn from_word(w: &Word, n: usize, cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Syntax("cap must be at least 1".into()));
        }
        w.check_alphabet(n)?;
        let gens: Vec<GroupElement> = (0..n).map(|i| Self::generator(n, cap, i)).collect();
        let invs: Vec<GroupElement> = gens.iter().map(GroupElement::inverse).collect();
        let mut acc = Self::identity(n, cap);
        for l in w.letters() {
            let f = if l.inverse {
                &invs[l.gen]
            } else {
                &gens[l.gen]
            };
            acc = &acc * f;
        }
        acc.word = Some(w.clone());
        Ok(acc)
    }

    /// Wraps a series; fails unless the constant term is 1.
    pub fn from_series(series: TruncatedSeries) -> Result<Self> {
        if !series.coeffs[0][0].is_one() {
            return Err(Error::Syntax("group elements need constant term 1".into()));
        }
        Ok(GroupElement { series, word: None })
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    pub fn word(&self) -> Option<&Word> {
        self.word.as_ref()
    }

    pub fn letters(&self) -> usize {
        self.series.n
    }

    pub fn cap(&self) -> usize {
        self.series.cap
    }

    pub fn is_identity(&self) -> bool {
        self.series.is_one()
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        Ok(GroupElement {
            series: self.series.try_mul(&other.series)?,
            word: None,
        })
    }

    /// `(1 + h)^e = Σ_k C(e,k) h^k`, exact at the cap for every integer `e`.
    pub fn pow(&self, e: &BigInt) -> Self {
        let n = self.series.n;
        let cap = self.series.cap;
        if e.is_zero() {
            return Self::identity(n, cap);
        }
        if e.is_one() {
            return self.clone();
        }
        let mut h = self.series.clone();
        h.coeffs[0][0] = BigInt::zero();
        let mut acc = TruncatedSeries::one(n, cap);
        let mut power = TruncatedSeries::one(n, cap);
        let mut binom = BigInt::one();
        for k in 1..=cap {
            power = power.mul_unchecked(&h);
            if power.coeffs[k..].iter().flatten().all(Zero::is_zero) {
                break;
            }
            // C(e,k) = C(e,k-1) * (e-k+1) / k, exact in the integers
            binom = binom * (e - BigInt::from(k - 1)) / BigInt::from(k);
            acc.add_scaled(&power, &binom);
        }
        GroupElement {
            series: acc,
            word: None,
        }
    }

    pub fn pow_i64(&self, e: i64) -> Self {
        self.pow(&BigInt::from(e))
    }

    /// Inverse via the finite geometric series in `g - 1`.
    pub fn inverse(&self) -> Self {
        self.pow(&BigInt::from(-1))
    }

    /// `[g,h] = g⁻¹h⁻¹gh`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.series.check_compatible(&other.series)?;
        Ok(self.comm(other))
    }

    pub(crate) fn comm(&self, other: &Self) -> Self {
        let left = &self.inverse() * &other.inverse();
        let right = self * other;
        &left * &right
    }

    /// Conjugate `h⁻¹gh`.
    pub fn conjugate_by(&self, h: &Self) -> Self {
        &(&h.inverse() * self) * h
    }

    /// Smallest degree carrying a nonzero term of `g - 1`; `None` for the
    /// identity.
    pub fn weight(&self) -> Option<usize> {
        (1..=self.series.cap).find(|&m| self.series.coeffs[m].iter().any(|c| !c.is_zero()))
    }

    /// Lowest nonzero homogeneous component of `g - 1`.
    pub fn leading_part(&self) -> Option<Homogeneous> {
        let m = self.weight()?;
        Some(Homogeneous {
            n: self.series.n,
            degree: m,
            coeffs: self.series.coeffs[m].clone(),
        })
    }

    pub fn relabel(&self, map: &[usize], n: usize) -> Self {
        GroupElement {
            series: self.series.relabel(map, n),
            word: self.word.as_ref().map(|w| w.relabel(map)),
        }
    }

    /// Drops every term above `cap` (the natural map onto a smaller quotient).
    pub fn truncate(&self, cap: usize) -> Self {
        assert!(cap <= self.series.cap);
        GroupElement {
            series: TruncatedSeries {
                n: self.series.n,
                cap,
                coeffs: self.series.coeffs[..=cap].to_vec(),
            },
            word: self.word.clone(),
        }
    }
}

impl std::ops::Mul for &GroupElement {
    type Output = GroupElement;

    /// Panics on a cap or alphabet mismatch; use [`GroupElement::try_mul`]
    /// for the checked version.
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.try_mul(rhs).expect("incompatible group elements")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    // Independent sparse multiplier used as the oracle.
    type Poly = BTreeMap<Vec<usize>, i64>;

    fn poly_mul(a: &Poly, b: &Poly, cap: usize) -> Poly {
        let mut out = Poly::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                if ma.len() + mb.len() > cap {
                    continue;
                }
                let mut m = ma.clone();
                m.extend(mb);
                *out.entry(m).or_default() += ca * cb;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    fn gen_poly(i: usize, inverse: bool, cap: usize) -> Poly {
        let mut p = Poly::new();
        p.insert(vec![], 1);
        if inverse {
            for k in 1..=cap {
                p.insert(vec![i; k], if k % 2 == 0 { 1 } else { -1 });
            }
        } else {
            p.insert(vec![i], 1);
        }
        p
    }

    fn oracle(w: &Word, cap: usize) -> Poly {
        let mut acc = Poly::new();
        acc.insert(vec![], 1);
        for l in w.letters() {
            acc = poly_mul(&acc, &gen_poly(l.gen, l.inverse, cap), cap);
        }
        acc
    }

    fn as_poly(g: &GroupElement) -> Poly {
        g.series()
            .terms()
            .into_iter()
            .map(|(m, c)| (m, i64::try_from(c).unwrap()))
            .collect()
    }

    fn xy_comm() -> Word {
        Word::commutator(&Word::generator(0), &Word::generator(1))
    }

    #[test]
    fn generator_and_identity_images() {
        let x = GroupElement::from_word(&Word::generator(0), 2, 3).unwrap();
        assert_eq!(x.series().to_string(), "1 + A");
        let e = GroupElement::from_word(&Word::from_signed(&[1, -1]), 2, 3).unwrap();
        assert!(e.is_identity());
    }

    #[test]
    fn commutator_image_at_cap_two() {
        let c = GroupElement::from_word(&xy_comm(), 2, 2).unwrap();
        let mut expected = Poly::new();
        expected.insert(vec![], 1);
        expected.insert(vec![0, 1], 1);
        expected.insert(vec![1, 0], -1);
        assert_eq!(as_poly(&c), expected);
        assert_eq!(as_poly(&c), oracle(&xy_comm(), 2));
        let x = GroupElement::generator(2, 2, 0);
        let y = GroupElement::generator(2, 2, 1);
        assert_eq!(x.commutator(&y).unwrap(), c);
    }

    #[test]
    fn weights() {
        assert_eq!(GroupElement::identity(2, 4).weight(), None);
        let c = GroupElement::from_word(&xy_comm(), 2, 4).unwrap();
        assert_eq!(c.weight(), Some(2));
        let cc = Word::commutator(&xy_comm(), &Word::generator(1));
        assert_eq!(
            GroupElement::from_word(&cc, 2, 4).unwrap().weight(),
            Some(3)
        );
    }

    #[test]
    fn leading_parts() {
        let c = GroupElement::from_word(&xy_comm(), 2, 4).unwrap();
        assert_eq!(
            c.leading_part().unwrap(),
            Homogeneous::from_terms(2, 2, &[(&[0, 1], 1), (&[1, 0], -1)])
        );
        let x = GroupElement::generator(2, 4, 0);
        assert_eq!(
            x.leading_part().unwrap(),
            Homogeneous::from_terms(2, 1, &[(&[0], 1)])
        );
        let x2 = GroupElement::from_word(&Word::from_signed(&[1, 1]), 2, 4).unwrap();
        assert_eq!(
            x2.leading_part().unwrap(),
            Homogeneous::from_terms(2, 1, &[(&[0], 2)])
        );
        assert!(GroupElement::identity(2, 4).leading_part().is_none());
    }

    #[test]
    fn inverse_matches_inverse_word() {
        let x = GroupElement::generator(2, 5, 0);
        let xi = GroupElement::from_word(&Word::from_signed(&[-1]), 2, 5).unwrap();
        assert_eq!(x.inverse(), xi);
        assert!((&x * &GroupElement::identity(2, 5)) == x);
    }

    #[test]
    fn cap_mismatch_is_an_error() {
        let a = GroupElement::generator(2, 2, 0);
        let b = GroupElement::generator(2, 3, 0);
        assert!(matches!(a.try_mul(&b), Err(Error::CapMismatch(2, 3))));
        assert!(a.commutator(&b).is_err());
        assert!(GroupElement::from_word(&Word::generator(2), 2, 3).is_err());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let w = Word::from_signed(&[1, 2, -1, 2, 2]);
        let g = GroupElement::from_word(&w, 2, 4).unwrap();
        let mut acc = GroupElement::identity(2, 4);
        for _ in 0..5 {
            acc = &acc * &g;
        }
        assert_eq!(g.pow_i64(5), acc);
        assert_eq!(g.pow_i64(-5), acc.inverse());
    }

    fn arb_word(n: i32, len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec((1..=n, any::<bool>()), 0..len).prop_map(|v| {
            let s: Vec<i32> = v
                .into_iter()
                .map(|(g, neg)| if neg { -g } else { g })
                .collect();
            Word::from_signed(&s)
        })
    }

    proptest! {
        #[test]
        fn agrees_with_oracle(w in arb_word(3, 10)) {
            let g = GroupElement::from_word(&w, 3, 4).unwrap();
            prop_assert_eq!(as_poly(&g), oracle(&w, 4));
        }

        #[test]
        fn homomorphism(u in arb_word(3, 10), v in arb_word(3, 10)) {
            let gu = GroupElement::from_word(&u, 3, 4).unwrap();
            let gv = GroupElement::from_word(&v, 3, 4).unwrap();
            let guv = GroupElement::from_word(&(&u * &v), 3, 4).unwrap();
            prop_assert_eq!(&gu * &gv, guv);
        }

        #[test]
        fn inverse_is_exact(u in arb_word(3, 12)) {
            let g = GroupElement::from_word(&u, 3, 5).unwrap();
            prop_assert!((&g * &g.inverse()).is_identity());
        }

        #[test]
        fn commutator_weight_is_superadditive(u in arb_word(2, 8), v in arb_word(2, 8)) {
            let g = GroupElement::from_word(&u, 2, 5).unwrap();
            let h = GroupElement::from_word(&v, 2, 5).unwrap();
            let c = g.commutator(&h).unwrap();
            if let (Some(a), Some(b), Some(w)) = (g.weight(), h.weight(), c.weight()) {
                prop_assert!(w >= a + b);
            }
        }
    }
}
