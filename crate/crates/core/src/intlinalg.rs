//! Exact integer matrices: Hermite and Smith normal forms, lattice
//! membership and abelian group invariants.
//!
//! Everything works over arbitrary-precision integers. Pivots are chosen by
//! minimal absolute value, which keeps intermediate entries small on the
//! relation matrices this crate produces.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows. All rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Self {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r);
        }
        IntMatrix {
            rows: nrows,
            cols,
            data,
        }
    }

    /// Convenience constructor from small integers.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square only.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
                a[(i, k)] = BigInt::zero();
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * factor;
            if !v.is_zero() {
                self.data[dst * self.cols + j] += v;
            }
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * factor;
            if !v.is_zero() {
                self.data[i * self.cols + dst] += v;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = -v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Row-style Hermite normal form.
///
/// Returns `(H, U)` with `U` unimodular and `U * M = H`. The nonzero rows of
/// `H` come first, in echelon form with positive pivots, and the entries above
/// each pivot lie in `[0, pivot)`. Zero rows are kept at the bottom so `H`
/// has the same shape as `M`.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..h.cols {
        if pivot_row == h.rows {
            break;
        }
        loop {
            // smallest nonzero entry at or below pivot_row
            let best = (pivot_row..h.rows)
                .filter(|&i| !h[(i, col)].is_zero())
                .min_by(|&a, &b| h[(a, col)].abs().cmp(&h[(b, col)].abs()));
            let Some(best) = best else { break };
            h.swap_rows(pivot_row, best);
            u.swap_rows(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..h.rows {
                if h[(i, col)].is_zero() {
                    continue;
                }
                let q = h[(i, col)].div_floor(&h[(pivot_row, col)]);
                let neg = -q;
                h.add_row_multiple(i, pivot_row, &neg);
                u.add_row_multiple(i, pivot_row, &neg);
                if !h[(i, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(pivot_row, col)].is_zero() {
            continue;
        }
        if h[(pivot_row, col)].is_negative() {
            h.negate_row(pivot_row);
            u.negate_row(pivot_row);
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    // Reduce entries above pivots.
    for &(pr, pc) in &pivots {
        for i in 0..pr {
            let q = h[(i, pc)].div_floor(&h[(pr, pc)]);
            if !q.is_zero() {
                let neg = -q;
                h.add_row_multiple(i, pr, &neg);
                u.add_row_multiple(i, pr, &neg);
            }
        }
    }
    (h, u)
}

/// Column index of the first nonzero entry, if any.
pub fn leading_index(v: &[BigInt]) -> Option<usize> {
    v.iter().position(|x| !x.is_zero())
}

/// Outcome of reducing a vector against a Hermite basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Membership {
    /// Coordinates with respect to the nonzero rows of the basis.
    Member(Vec<BigInt>),
    /// The vector left after reduction; nonzero.
    NotMember(Vec<BigInt>),
}

/// Reduces `v` against the nonzero rows of a Hermite-form matrix.
///
/// Each pivot step subtracts the truncated quotient, so a failing residue
/// keeps the sign of the unreduced entry: `(1,0)` against rows `(1,1),(0,2)`
/// leaves `(0,-1)`.
pub fn lattice_membership(v: &[BigInt], h: &IntMatrix) -> crate::Result<Membership> {
    if v.len() != h.cols {
        return Err(crate::Error::DimensionMismatch {
            expected: h.cols,
            found: v.len(),
        });
    }
    let mut residue = v.to_vec();
    let mut coords = Vec::new();
    for i in 0..h.rows {
        let row = h.row(i);
        let Some(p) = leading_index(row) else { break };
        let q = &residue[p] / &row[p];
        if !q.is_zero() {
            for (r, x) in residue.iter_mut().zip(row) {
                if !x.is_zero() {
                    *r -= &q * x;
                }
            }
        }
        coords.push(q);
    }
    if residue.iter().all(Zero::is_zero) {
        Ok(Membership::Member(coords))
    } else {
        Ok(Membership::NotMember(residue))
    }
}

/// Smith normal form: `(D, U, V)` with `U * M * V = D`, `U` and `V`
/// unimodular, `D` diagonal with nonnegative entries forming a divisor chain.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut v = IntMatrix::identity(m.cols);
    let limit = m.rows.min(m.cols);
    for t in 0..limit {
        // pick smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..d.rows {
            for j in t..d.cols {
                if d[(i, j)].is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap_rows(t, bi);
        u.swap_rows(t, bi);
        d.swap_cols(t, bj);
        v.swap_cols(t, bj);
        loop {
            let mut changed = false;
            // clear column t
            for i in t + 1..d.rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                let neg = -q;
                d.add_row_multiple(i, t, &neg);
                u.add_row_multiple(i, t, &neg);
                if !d[(i, t)].is_zero() {
                    d.swap_rows(t, i);
                    u.swap_rows(t, i);
                    changed = true;
                }
            }
            // clear row t
            for j in t + 1..d.cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                let neg = -q;
                d.add_col_multiple(j, t, &neg);
                v.add_col_multiple(j, t, &neg);
                if !d[(t, j)].is_zero() {
                    d.swap_cols(t, j);
                    v.swap_cols(t, j);
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let bad = (t + 1..d.rows)
                .find(|&i| (t + 1..d.cols).any(|j| !d[(i, j)].is_multiple_of(&d[(t, t)])));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    (d, u, v)
}

/// Finitely generated abelian group in canonical form: free rank plus a
/// divisor chain `d1 | d2 | ...` with every `di >= 2`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianInvariants {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        AbelianInvariants {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    /// Builds invariants from a torsion list given as small integers; the
    /// list must already be a divisor chain.
    pub fn new(free_rank: usize, torsion: &[u64]) -> Self {
        let inv = AbelianInvariants {
            free_rank,
            torsion: torsion.iter().map(|&d| BigInt::from(d)).collect(),
        };
        debug_assert!(inv.is_canonical());
        inv
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        let two = BigInt::from(2);
        self.torsion.iter().all(|d| d >= &two)
            && self.torsion.windows(2).all(|w| w[1].is_multiple_of(&w[0]))
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    /// Canonicalizes an arbitrary list of cyclic orders (0 meaning infinite
    /// cyclic, 1 meaning trivial) into invariant-factor form.
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        let mut free_rank = 0;
        let mut finite = Vec::new();
        for d in orders {
            let d = d.abs();
            if d.is_zero() {
                free_rank += 1;
            } else if !d.is_one() {
                finite.push(d);
            }
        }
        let m = IntMatrix::from_rows(
            finite.len(),
            (0..finite.len())
                .map(|i| {
                    let mut r = vec![BigInt::zero(); finite.len()];
                    r[i] = finite[i].clone();
                    r
                })
                .collect(),
        );
        let base = abelian_invariants(finite.len(), &m);
        AbelianInvariants {
            free_rank: free_rank + base.free_rank,
            torsion: base.torsion,
        }
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t: Vec<String> = self.torsion.iter().map(|d| d.to_string()).collect();
        write!(f, "free_rank={} torsion=[{}]", self.free_rank, t.join(","))
    }
}

/// Invariants of the abelian group on `gen_count` generators subject to the
/// rows of `relations`.
pub fn abelian_invariants(gen_count: usize, relations: &IntMatrix) -> AbelianInvariants {
    assert_eq!(
        relations.cols(),
        gen_count,
        "relation matrix must have one column per generator"
    );
    let (d, _, _) = snf(relations);
    let mut nonzero = 0;
    let mut torsion = Vec::new();
    for i in 0..d.rows().min(d.cols()) {
        let x = &d[(i, i)];
        if x.is_zero() {
            continue;
        }
        nonzero += 1;
        if !x.is_one() {
            torsion.push(x.clone());
        }
    }
    AbelianInvariants {
        free_rank: gen_count - nonzero,
        torsion,
    }
}

/// Rank over the rationals.
pub fn rank(m: &IntMatrix) -> usize {
    let (h, _) = hnf(m);
    (0..h.rows()).filter(|&i| !h.is_zero_row(i)).count()
}
