//! Subgroups of the free nilpotent group `F/γ_{W+1}(F)`.
//!
//! A subgroup `U` is stored as a filtered generating sequence: for each
//! degree `m` a lattice `L_m` of Lie coordinates in Hermite form, and for
//! each lattice row an element of `U` of weight `m` whose leading Lie
//! coordinates are exactly that row. Once the sequence is saturated (every
//! commutator of two stored elements sieves back in), the set of ordered
//! products of powers of stored elements is the whole of `U`, and
//! `U ∩ γ_m` is generated by the stored elements of degree at least `m`.
//!
//! Membership is decided by sieving: reduce the leading coordinates of an
//! element against `L_m`, divide off the matching stored elements, and
//! repeat at strictly larger weight until the element is trivial or an
//! irreducible residue is left.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::intlinalg::{abelian_invariants, leading_index, AbelianInvariants, IntMatrix};
use crate::lyndon::{bracketing, LyndonBasis};
use crate::magnus::GroupElement;
use crate::presentation::Word;
use crate::{Error, Result};

/// Number of monomials of degree `1..=cap` over `n` letters: the size of a
/// dense series in this ambient, and the quantity the cap guard bounds.
pub fn monomial_budget(n: usize, cap: usize) -> u128 {
    (1..=cap).map(|m| (n as u128).pow(m as u32)).sum()
}

/// The free nilpotent group `F/γ_{W+1}(F)` on `n` generators.
#[derive(Debug)]
pub struct Ambient {
    n: usize,
    cap: usize,
    bases: Vec<LyndonBasis>,
    generators: Vec<GroupElement>,
    conjugators: Vec<GroupElement>,
}

impl Ambient {
    /// Builds the ambient group, refusing caps whose series would exceed
    /// `budget` monomials.
    pub fn new(n: usize, cap: usize, budget: u128) -> Result<Arc<Self>> {
        if cap == 0 {
            return Err(Error::Syntax("cap must be at least 1".into()));
        }
        let needed = monomial_budget(n, cap);
        if needed > budget {
            return Err(Error::CapGuard { needed, budget });
        }
        let bases = (1..=cap).map(|m| LyndonBasis::new(n, m)).collect();
        let generators: Vec<GroupElement> =
            (0..n).map(|i| GroupElement::generator(n, cap, i)).collect();
        let conjugators = generators
            .iter()
            .flat_map(|g| [g.clone(), g.inverse()])
            .collect();
        Ok(Arc::new(Ambient {
            n,
            cap,
            bases,
            generators,
            conjugators,
        }))
    }

    pub fn letters(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn basis(&self, m: usize) -> &LyndonBasis {
        &self.bases[m - 1]
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn element(&self, w: &Word) -> Result<GroupElement> {
        GroupElement::from_word(w, self.n, self.cap)
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.cap() != self.cap {
            return Err(Error::CapMismatch(self.cap, g.cap()));
        }
        if g.letters() != self.n {
            return Err(Error::AmbientMismatch);
        }
        Ok(())
    }

    /// Weight and leading Lie coordinates of a nontrivial element.
    pub fn leading_coordinates(&self, g: &GroupElement) -> Option<(usize, Vec<BigInt>)> {
        let lead = g.leading_part()?;
        let m = lead.degree;
        let coords = self.bases[m - 1]
            .lie_coordinates(&lead)
            .expect("degree within cap")
            .expect("leading part of a group element is a Lie element");
        Some((m, coords))
    }

    fn same(a: &Arc<Ambient>, b: &Arc<Ambient>) -> bool {
        Arc::ptr_eq(a, b) || (a.n == b.n && a.cap == b.cap)
    }
}

/// Whether closures also enforce invariance under conjugation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Closure {
    Plain,
    Normal,
}

/// One step of a membership certificate: the stored element at
/// (`degree`, `row`) raised to `exponent`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RecipeStep {
    pub degree: usize,
    pub row: usize,
    pub exponent: BigInt,
}

/// Result of sieving an element through a subgroup.
#[derive(Clone, Debug)]
pub enum Sieve {
    /// `g` equals the ordered product of the listed powers.
    Member(Vec<RecipeStep>),
    /// First irreducible leftover; its weight is where the sieve stopped.
    Residue(GroupElement),
}

impl Sieve {
    pub fn is_member(&self) -> bool {
        matches!(self, Sieve::Member(_))
    }
}

#[derive(Clone, Debug)]
struct Row {
    pivot: usize,
    coords: Vec<BigInt>,
    element: GroupElement,
    id: u64,
}

#[derive(Clone, Debug)]
pub struct FilteredSubgroup {
    ambient: Arc<Ambient>,
    normal: bool,
    levels: Vec<Vec<Row>>,
    next_id: u64,
    checked_pairs: HashSet<(u64, u64)>,
    checked_conjugates: HashSet<u64>,
}

fn sub_scaled(v: &mut [BigInt], row: &[BigInt], q: &BigInt) {
    for (x, r) in v.iter_mut().zip(row) {
        if !r.is_zero() {
            *x -= q * r;
        }
    }
}

impl FilteredSubgroup {
    pub fn trivial(ambient: &Arc<Ambient>) -> Self {
        FilteredSubgroup {
            ambient: Arc::clone(ambient),
            normal: true,
            levels: vec![Vec::new(); ambient.cap],
            next_id: 0,
            checked_pairs: HashSet::new(),
            checked_conjugates: HashSet::new(),
        }
    }

    /// The whole ambient group, with the standard bracketings of Lyndon
    /// words as stored elements.
    pub fn full(ambient: &Arc<Ambient>) -> Self {
        let mut s = Self::trivial(ambient);
        for m in 1..=ambient.cap {
            let basis = ambient.basis(m);
            for (j, w) in basis.words().iter().enumerate() {
                let (word, _) = bracketing(ambient.n, w).expect("basis words are Lyndon");
                let element = ambient.element(&word).expect("word over ambient letters");
                let mut coords = vec![BigInt::zero(); basis.len()];
                coords[j] = BigInt::one();
                let id = s.fresh_id();
                s.levels[m - 1].push(Row {
                    pivot: j,
                    coords,
                    element,
                    id,
                });
            }
        }
        s
    }

    /// Saturated closure of `elements` in the given mode.
    pub fn closure<I>(ambient: &Arc<Ambient>, elements: I, mode: Closure) -> Result<Self>
    where
        I: IntoIterator<Item = GroupElement>,
    {
        let mut s = Self::trivial(ambient);
        s.normal = mode == Closure::Normal;
        s.insert_and_close(elements, mode)?;
        Ok(s)
    }

    /// Normal closure of a set of words.
    pub fn normal_closure_of_words(ambient: &Arc<Ambient>, words: &[Word]) -> Result<Self> {
        let elems = words
            .iter()
            .map(|w| ambient.element(w))
            .collect::<Result<Vec<_>>>()?;
        Self::closure(ambient, elems, Closure::Normal)
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.ambient
    }

    pub fn is_normal(&self) -> bool {
        self.normal
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    fn check_ambient(&self, other: &FilteredSubgroup) -> Result<()> {
        if Ambient::same(&self.ambient, &other.ambient) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    /// Stored elements as `(degree, element)`, lowest degree first.
    pub fn stored(&self) -> Vec<(usize, &GroupElement)> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(i, rows)| rows.iter().map(move |r| (i + 1, &r.element)))
            .collect()
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.stored().into_iter().map(|(_, e)| e.clone()).collect()
    }

    pub fn generator_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Position of a stored element in [`FilteredSubgroup::stored`] order.
    fn flat_index(&self, degree: usize, row: usize) -> usize {
        self.levels[..degree - 1]
            .iter()
            .map(Vec::len)
            .sum::<usize>()
            + row
    }

    /// Hermite basis of the degree-`m` lattice.
    pub fn lattice(&self, m: usize) -> IntMatrix {
        let dim = self.ambient.basis(m).len();
        IntMatrix::from_rows(
            dim,
            self.levels[m - 1]
                .iter()
                .map(|r| r.coords.clone())
                .collect(),
        )
    }

    pub fn rank_at(&self, m: usize) -> usize {
        self.levels[m - 1].len()
    }

    /// Index of `L_m` in the full coordinate lattice; `None` if of lower rank.
    pub fn index_at(&self, m: usize) -> Option<BigInt> {
        if self.rank_at(m) < self.ambient.basis(m).len() {
            return None;
        }
        Some(
            self.levels[m - 1]
                .iter()
                .map(|r| r.coords[r.pivot].clone())
                .product(),
        )
    }

    /// Every lattice is the full coordinate lattice.
    pub fn is_full(&self) -> bool {
        (1..=self.ambient.cap).all(|m| self.index_at(m).is_some_and(|i| i.is_one()))
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.iter().all(Vec::is_empty)
    }

    /// Reduces `g` through the stored sequence.
    pub fn sieve(&self, g: &GroupElement) -> Result<Sieve> {
        self.ambient.check(g)?;
        let mut g = g.clone();
        let mut recipe = Vec::new();
        loop {
            let Some((m, mut v)) = self.ambient.leading_coordinates(&g) else {
                return Ok(Sieve::Member(recipe));
            };
            for (i, row) in self.levels[m - 1].iter().enumerate() {
                let q = v[row.pivot].div_floor(&row.coords[row.pivot]);
                if q.is_zero() {
                    continue;
                }
                sub_scaled(&mut v, &row.coords, &q);
                g = &row.element.pow(&-&q) * &g;
                recipe.push(RecipeStep {
                    degree: m,
                    row: i,
                    exponent: q,
                });
            }
            if v.iter().any(|x| !x.is_zero()) {
                return Ok(Sieve::Residue(g));
            }
        }
    }

    pub fn contains_element(&self, g: &GroupElement) -> Result<bool> {
        Ok(self.sieve(g)?.is_member())
    }

    /// Every stored element of `other` sieves into `self`.
    pub fn contains(&self, other: &FilteredSubgroup) -> Result<bool> {
        self.check_ambient(other)?;
        for (_, e) in other.stored() {
            if !self.contains_element(e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Mutual containment.
    pub fn same_subgroup(&self, other: &FilteredSubgroup) -> Result<bool> {
        Ok(self.contains(other)? && other.contains(self)?)
    }

    /// Multiplies out a membership recipe.
    pub fn evaluate(&self, recipe: &[RecipeStep]) -> GroupElement {
        recipe.iter().fold(
            GroupElement::identity(self.ambient.n, self.ambient.cap),
            |acc, s| &acc * &self.levels[s.degree - 1][s.row].element.pow(&s.exponent),
        )
    }

    /// Adds a residue to its level, keeping the level in Hermite form.
    /// Returns elements pushed to higher weight by the row operations.
    fn insert(&mut self, g: GroupElement, spill: &mut Vec<GroupElement>) {
        let (m, coords) = self
            .ambient
            .leading_coordinates(&g)
            .expect("residues are nontrivial");
        let mut cur_v = coords;
        let mut cur_g = g;
        let mut i = 0;
        loop {
            let lc = leading_index(&cur_v).expect("nonzero residue vector");
            let rows_len = self.levels[m - 1].len();
            if i == rows_len || lc < self.levels[m - 1][i].pivot {
                if cur_v[lc].is_negative() {
                    cur_v.iter_mut().for_each(|x| *x = -std::mem::take(x));
                    cur_g = cur_g.inverse();
                }
                let id = self.fresh_id();
                self.levels[m - 1].insert(
                    i,
                    Row {
                        pivot: lc,
                        coords: cur_v,
                        element: cur_g,
                        id,
                    },
                );
                break;
            }
            if lc > self.levels[m - 1][i].pivot {
                i += 1;
                continue;
            }
            // same pivot: combine by a unimodular 2x2 transform
            let id = self.fresh_id();
            let row = &mut self.levels[m - 1][i];
            let a = row.coords[lc].clone();
            let b = cur_v[lc].clone();
            let (g0, s, t) = if b.is_multiple_of(&a) {
                (a.clone(), BigInt::one(), BigInt::zero())
            } else {
                let e = a.extended_gcd(&b);
                (e.gcd, e.x, e.y)
            };
            let (g0, s, t) = if g0.is_negative() {
                (-g0, -s, -t)
            } else {
                (g0, s, t)
            };
            let bq = &b / &g0;
            let aq = &a / &g0;
            let new_row: Vec<BigInt> = row
                .coords
                .iter()
                .zip(&cur_v)
                .map(|(r, c)| &s * r + &t * c)
                .collect();
            let new_cur: Vec<BigInt> = row
                .coords
                .iter()
                .zip(&cur_v)
                .map(|(r, c)| &bq * r - &aq * c)
                .collect();
            let new_row_el = &row.element.pow(&s) * &cur_g.pow(&t);
            let new_cur_el = &row.element.pow(&bq) * &cur_g.pow(&-&aq);
            if !(s.is_one() && t.is_zero()) {
                row.coords = new_row;
                row.element = new_row_el;
                row.id = id;
            }
            if new_cur.iter().all(Zero::is_zero) {
                if !new_cur_el.is_identity() {
                    spill.push(new_cur_el);
                }
                break;
            }
            cur_v = new_cur;
            cur_g = new_cur_el;
            i += 1;
        }
        self.normalize(m);
    }

    /// Reduces entries above each pivot into `[0, pivot)`.
    fn normalize(&mut self, m: usize) {
        let len = self.levels[m - 1].len();
        for j in 0..len {
            for i in 0..j {
                let (p, pv) = {
                    let rj = &self.levels[m - 1][j];
                    (rj.pivot, rj.coords[rj.pivot].clone())
                };
                let q = self.levels[m - 1][i].coords[p].div_floor(&pv);
                if q.is_zero() {
                    continue;
                }
                let id = self.fresh_id();
                let rows = &mut self.levels[m - 1];
                let (lo, hi) = rows.split_at_mut(j);
                let ri = &mut lo[i];
                let rj = &hi[0];
                sub_scaled(&mut ri.coords, &rj.coords, &q);
                ri.element = &ri.element * &rj.element.pow(&-&q);
                ri.id = id;
            }
        }
    }

    fn absorb(&mut self, queue: &mut Vec<GroupElement>) -> Result<bool> {
        let mut grew = false;
        while let Some(g) = queue.pop() {
            if let Sieve::Residue(r) = self.sieve(&g)? {
                let mut spill = Vec::new();
                self.insert(r, &mut spill);
                queue.extend(spill);
                grew = true;
            }
        }
        Ok(grew)
    }

    /// One pass over commutators of stored pairs (and conjugates by
    /// generators in normal mode). Returns whether anything was added.
    fn sweep(&mut self, mode: Closure, use_cache: bool) -> Result<bool> {
        let cap = self.ambient.cap;
        let snapshot: Vec<(usize, GroupElement, u64)> = self
            .levels
            .iter()
            .enumerate()
            .flat_map(|(i, rows)| rows.iter().map(move |r| (i + 1, r.element.clone(), r.id)))
            .collect();
        let mut grew = false;
        for (a, (da, ea, ia)) in snapshot.iter().enumerate() {
            for (db, eb, ib) in snapshot.iter().skip(a + 1) {
                if da + db > cap {
                    continue;
                }
                let key = (*ia.min(ib), *ia.max(ib));
                if use_cache && self.checked_pairs.contains(&key) {
                    continue;
                }
                let mut q = vec![ea.comm(eb)];
                grew |= self.absorb(&mut q)?;
                self.checked_pairs.insert(key);
            }
            if mode == Closure::Normal && *da < cap {
                if use_cache && self.checked_conjugates.contains(ia) {
                    continue;
                }
                let ambient = Arc::clone(&self.ambient);
                let mut q: Vec<GroupElement> =
                    ambient.conjugators.iter().map(|x| ea.comm(x)).collect();
                grew |= self.absorb(&mut q)?;
                self.checked_conjugates.insert(*ia);
            }
        }
        Ok(grew)
    }

    /// Adds `elements` and closes under products and inverses (and, in
    /// normal mode, conjugation) until saturated.
    pub fn insert_and_close<I>(&mut self, elements: I, mode: Closure) -> Result<()>
    where
        I: IntoIterator<Item = GroupElement>,
    {
        let mut queue: Vec<GroupElement> = elements.into_iter().collect();
        for g in &queue {
            self.ambient.check(g)?;
        }
        if mode == Closure::Normal {
            self.normal = true;
        } else if !queue.is_empty() {
            self.normal = false;
        }
        self.absorb(&mut queue)?;
        loop {
            while self.sweep(mode, true)? {}
            if !self.sweep(mode, false)? {
                break;
            }
        }
        Ok(())
    }

    /// Smallest subgroup containing both; normal when either input is.
    pub fn join(&self, other: &FilteredSubgroup) -> Result<FilteredSubgroup> {
        self.check_ambient(other)?;
        let mode = if self.normal || other.normal {
            Closure::Normal
        } else {
            Closure::Plain
        };
        let mut out = self.clone();
        out.insert_and_close(other.elements(), mode)?;
        out.normal = mode == Closure::Normal;
        Ok(out)
    }

    /// Subgroup generated by both, without taking a normal closure. Equals
    /// the product `UV` when one factor normalizes the other.
    pub fn product(&self, other: &FilteredSubgroup) -> Result<FilteredSubgroup> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        out.insert_and_close(other.elements(), Closure::Plain)?;
        out.normal = false;
        Ok(out)
    }

    /// Normal closure of the commutators of stored elements of `self` and
    /// `other`. For normal `U`, `V` this is `[U, V]`.
    pub fn commutator_with(&self, other: &FilteredSubgroup) -> Result<FilteredSubgroup> {
        self.check_ambient(other)?;
        let cap = self.ambient.cap;
        let mut gens = Vec::new();
        for (du, u) in self.stored() {
            for (dv, v) in other.stored() {
                if du + dv <= cap {
                    gens.push(u.comm(v));
                }
            }
        }
        Self::closure(&self.ambient, gens, Closure::Normal)
    }

    /// `[U, F, ..., F]` with `times` copies of the ambient group.
    pub fn iterated_commutator(&self, times: usize) -> Result<FilteredSubgroup> {
        let full = FilteredSubgroup::full(&self.ambient);
        let mut cur = self.clone();
        for _ in 0..times {
            cur = cur.commutator_with(&full)?;
        }
        Ok(cur)
    }

    /// `U ∩ γ_m(F)` (modulo the cap): the stored elements of degree ≥ m.
    pub fn intersect_with_gamma(&self, m: usize) -> Result<FilteredSubgroup> {
        if m == 0 || m > self.ambient.cap {
            return Err(Error::DegreeAboveCap {
                degree: m,
                cap: self.ambient.cap,
            });
        }
        let mut out = self.clone();
        for level in out.levels.iter_mut().take(m - 1) {
            level.clear();
        }
        out.checked_pairs.clear();
        out.checked_conjugates.clear();
        Ok(out)
    }

    /// `|F / U γ_{W+1}|`, or `None` when infinite.
    pub fn quotient_order(&self) -> Option<BigInt> {
        let mut order = BigInt::one();
        for m in 1..=self.ambient.cap {
            order *= self.index_at(m)?;
        }
        Some(order)
    }

    /// True when `U ∩ V` is trivial, witnessed degree by degree: the leading
    /// lattices of the two subgroups span a lattice of rank equal to the sum
    /// of their ranks. A nontrivial common element would put its leading
    /// coordinates into both lattices at its weight.
    pub fn meets_trivially(&self, other: &FilteredSubgroup) -> Result<bool> {
        self.check_ambient(other)?;
        for m in 1..=self.ambient.cap {
            let dim = self.ambient.basis(m).len();
            let mut rows: Vec<Vec<BigInt>> = self.levels[m - 1]
                .iter()
                .map(|r| r.coords.clone())
                .collect();
            rows.extend(other.levels[m - 1].iter().map(|r| r.coords.clone()));
            let expect = rows.len();
            if crate::intlinalg::rank(&IntMatrix::from_rows(dim, rows)) != expect {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Stored elements carried into a larger ambient through a letter map.
    pub fn embed_elements(
        &self,
        target: &Arc<Ambient>,
        map: &[usize],
    ) -> Result<Vec<GroupElement>> {
        if target.cap != self.ambient.cap {
            return Err(Error::CapMismatch(target.cap, self.ambient.cap));
        }
        Ok(self
            .stored()
            .into_iter()
            .map(|(_, e)| e.relabel(map, target.n))
            .collect())
    }

    /// Exponent vector of a member, indexed like [`FilteredSubgroup::stored`].
    fn exponent_vector(&self, recipe: &[RecipeStep]) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.generator_count()];
        for s in recipe {
            v[self.flat_index(s.degree, s.row)] += &s.exponent;
        }
        v
    }

    /// Invariants of the abelian quotient `N / D`.
    ///
    /// Generators are the stored elements of `N`, which form a polycyclic
    /// sequence with infinite relative orders. Relations are the exponent
    /// vectors of the stored elements of `D` and of all commutators of pairs
    /// of generators.
    pub fn quotient_invariants(
        numerator: &FilteredSubgroup,
        denominator: &FilteredSubgroup,
    ) -> Result<AbelianInvariants> {
        numerator.check_ambient(denominator)?;
        let gens = numerator.stored();
        let mut rows = Vec::new();
        for (_, d) in denominator.stored() {
            match numerator.sieve(d)? {
                Sieve::Member(recipe) => rows.push(numerator.exponent_vector(&recipe)),
                Sieve::Residue(_) => {
                    return Err(Error::Quotient(
                        "denominator is not contained in numerator".into(),
                    ))
                }
            }
        }
        let cap = numerator.ambient.cap;
        for (i, (di, gi)) in gens.iter().enumerate() {
            for (dj, gj) in gens.iter().skip(i + 1) {
                if di + dj > cap {
                    continue;
                }
                let c = gi.comm(gj);
                if !denominator.contains_element(&c)? {
                    return Err(Error::Quotient("quotient is not abelian".into()));
                }
                match numerator.sieve(&c)? {
                    Sieve::Member(recipe) => rows.push(numerator.exponent_vector(&recipe)),
                    Sieve::Residue(_) => {
                        return Err(Error::Quotient("numerator is not saturated".into()))
                    }
                }
            }
        }
        let m = IntMatrix::from_rows(gens.len(), rows);
        Ok(abelian_invariants(gens.len(), &m))
    }
}

impl fmt::Display for FilteredSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in 1..=self.ambient.cap {
            let rows: Vec<String> = self.levels[m - 1]
                .iter()
                .map(|r| {
                    let c: Vec<String> = r.coords.iter().map(|x| x.to_string()).collect();
                    format!("({})", c.join(","))
                })
                .collect();
            writeln!(f, "L{m}: {}", rows.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{parse_word, Alphabet};

    fn ambient(n: usize, cap: usize) -> Arc<Ambient> {
        Ambient::new(n, cap, 1_000_000).unwrap()
    }

    fn words(a: &Arc<Ambient>, texts: &[&str]) -> Vec<GroupElement> {
        let names: Vec<String> = ["x", "y", "z"][..a.letters()]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let alpha = Alphabet::new(&names).unwrap();
        texts
            .iter()
            .map(|t| a.element(&parse_word(t, &alpha).unwrap()).unwrap())
            .collect()
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn sieve_powers_in_cyclic_ambient() {
        let a = ambient(1, 1);
        let u = FilteredSubgroup::closure(&a, words(&a, &["x^2"]), Closure::Plain).unwrap();
        let x4 = &words(&a, &["x^4"])[0];
        match u.sieve(x4).unwrap() {
            Sieve::Member(r) => {
                assert_eq!(
                    r,
                    vec![RecipeStep {
                        degree: 1,
                        row: 0,
                        exponent: big(2)
                    }]
                );
                assert_eq!(&u.evaluate(&r), x4);
            }
            Sieve::Residue(_) => panic!("x^4 should be a member"),
        }
        match u.sieve(&words(&a, &["x"])[0]).unwrap() {
            Sieve::Residue(r) => assert_eq!(r.weight(), Some(1)),
            Sieve::Member(_) => panic!("x is not in <x^2>"),
        }
        assert!(matches!(
            u.sieve(&GroupElement::identity(1, 1)).unwrap(),
            Sieve::Member(ref r) if r.is_empty()
        ));
        assert_eq!(u.lattice(1), IntMatrix::from_i64(&[&[2]]));
    }

    #[test]
    fn klein_four_relators_at_cap_two() {
        let a = ambient(2, 2);
        let r = FilteredSubgroup::closure(&a, words(&a, &["x^2", "y^2", "[x,y]"]), Closure::Normal)
            .unwrap();
        assert_eq!(r.index_at(1), Some(big(4)));
        assert_eq!(r.index_at(2), Some(big(1)));
        assert_eq!(r.quotient_order(), Some(big(4)));
        let rf = r.commutator_with(&FilteredSubgroup::full(&a)).unwrap();
        assert_eq!(rf.rank_at(1), 0);
        assert_eq!(rf.lattice(2), IntMatrix::from_i64(&[&[2]]));
        let num = r.intersect_with_gamma(2).unwrap();
        assert_eq!(num.rank_at(1), 0);
        assert_eq!(num.index_at(2), Some(big(1)));
        let inv = FilteredSubgroup::quotient_invariants(&num, &rf).unwrap();
        assert_eq!(inv, AbelianInvariants::new(0, &[2]));
    }

    #[test]
    fn commutator_closure_at_cap_two() {
        let a = ambient(2, 2);
        let r = FilteredSubgroup::closure(&a, words(&a, &["[x,y]"]), Closure::Normal).unwrap();
        assert_eq!(r.rank_at(1), 0);
        assert_eq!(r.index_at(2), Some(big(1)));
        assert_eq!(r.quotient_order(), None);
        let num = r.intersect_with_gamma(2).unwrap();
        let inv =
            FilteredSubgroup::quotient_invariants(&num, &FilteredSubgroup::trivial(&a)).unwrap();
        assert_eq!(inv, AbelianInvariants::free(1));
    }

    #[test]
    fn joins() {
        let a = ambient(1, 1);
        let u2 = FilteredSubgroup::closure(&a, words(&a, &["x^2"]), Closure::Plain).unwrap();
        let u3 = FilteredSubgroup::closure(&a, words(&a, &["x^3"]), Closure::Plain).unwrap();
        let j = u2.join(&u3).unwrap();
        assert_eq!(j.lattice(1), IntMatrix::from_i64(&[&[1]]));
        let t = FilteredSubgroup::trivial(&a);
        assert!(u2.join(&t).unwrap().same_subgroup(&u2).unwrap());
        assert!(u2.join(&u2).unwrap().same_subgroup(&u2).unwrap());
    }

    #[test]
    fn commutators_in_rank_one_are_trivial() {
        let a = ambient(1, 3);
        let f = FilteredSubgroup::full(&a);
        assert!(f.commutator_with(&f).unwrap().is_trivial());
        let t = FilteredSubgroup::trivial(&a);
        assert!(t.commutator_with(&f).unwrap().is_trivial());
    }

    #[test]
    fn gamma_intersections() {
        let a = ambient(2, 3);
        let f = FilteredSubgroup::full(&a);
        assert!(f
            .intersect_with_gamma(1)
            .unwrap()
            .same_subgroup(&f)
            .unwrap());
        let t = FilteredSubgroup::trivial(&a);
        assert!(t.intersect_with_gamma(2).unwrap().is_trivial());
        assert!(matches!(
            f.intersect_with_gamma(4),
            Err(Error::DegreeAboveCap { .. })
        ));
    }

    #[test]
    fn quotient_orders() {
        let a = ambient(1, 1);
        let u = FilteredSubgroup::closure(&a, words(&a, &["x^4"]), Closure::Normal).unwrap();
        assert_eq!(u.quotient_order(), Some(big(4)));
    }

    #[test]
    fn full_group_is_saturated() {
        let a = ambient(2, 4);
        let mut f = FilteredSubgroup::full(&a);
        let before = f.generator_count();
        f.insert_and_close(Vec::new(), Closure::Normal).unwrap();
        assert_eq!(f.generator_count(), before);
        assert!(f.is_full());
    }

    #[test]
    fn ambient_mismatch() {
        let a = ambient(2, 2);
        let b = ambient(2, 3);
        let u = FilteredSubgroup::full(&a);
        let v = FilteredSubgroup::full(&b);
        assert!(matches!(u.join(&v), Err(Error::AmbientMismatch)));
        assert!(u.sieve(&GroupElement::generator(2, 3, 0)).is_err());
    }

    #[test]
    fn cap_guard() {
        assert!(matches!(
            Ambient::new(2, 3, 10),
            Err(Error::CapGuard { needed: 14, .. })
        ));
    }

    #[test]
    fn free_factors_meet_trivially() {
        let a = ambient(2, 3);
        let x = FilteredSubgroup::closure(&a, words(&a, &["x"]), Closure::Normal).unwrap();
        let y = FilteredSubgroup::closure(&a, words(&a, &["y"]), Closure::Plain).unwrap();
        assert!(x.meets_trivially(&y).unwrap());
        assert!(!x.meets_trivially(&x).unwrap());
    }
}
