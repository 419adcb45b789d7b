//! Dense linear algebra over GF(2) with bit-packed rows.
//!
//! Matrices act on column vectors: an `r x c` matrix sends `F^c` to `F^r`.
//! Subspaces are represented by matrices whose rows span them.

use std::fmt;

const W: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(W)
}

/// A vector over GF(2) stored as packed 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / W] >> (i % W)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % W);
        if b {
            self.words[i / W] |= m;
        } else {
            self.words[i / W] &= !m;
        }
    }

    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / W] ^= 1u64 << (i % W);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn add_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * W + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * W + t)
            })
        })
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut v = BitVec::zeros(self.len + other.len);
        for i in self.ones() {
            v.set(i, true);
        }
        for i in other.ones() {
            v.set(self.len + i, true);
        }
        v
    }

    /// The bits in `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        let mut v = BitVec::zeros(len);
        for i in self.ones() {
            if i >= start && i < start + len {
                v.set(i - start, true);
            }
        }
        v
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "[{s}]")
    }
}

/// A dense GF(2) matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix {
            rows: (0..rows).map(|_| BitVec::zeros(cols)).collect(),
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        F2Matrix {
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
            cols: n,
        }
    }

    /// Builds a matrix from its rows; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length mismatch");
        F2Matrix { rows, cols }
    }

    /// Builds a matrix from its columns, each of length `rows`.
    pub fn from_cols(rows: usize, cols: &[BitVec]) -> Self {
        let mut m = F2Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for i in c.ones() {
                m.set(i, j, true);
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = F2Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.rows[i].set(j, b)
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        self.rows[i].flip(j)
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVec> {
        self.rows
    }

    pub fn col(&self, j: usize) -> BitVec {
        let mut v = BitVec::zeros(self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.get(j) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_zero())
    }

    /// The submatrix on the given rows and columns, in the given orders.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> F2Matrix {
        F2Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    pub fn push_row(&mut self, r: BitVec) {
        assert_eq!(r.len(), self.cols);
        self.rows.push(r);
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut t = F2Matrix::zeros(self.cols, self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// `self * v` for a column vector `v`.
    pub fn apply(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "dimension mismatch in apply");
        let mut out = BitVec::zeros(self.nrows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.nrows(), "dimension mismatch in mul");
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = BitVec::zeros(other.cols);
                for k in r.ones() {
                    acc.add_assign(&other.rows[k]);
                }
                acc
            })
            .collect();
        F2Matrix {
            rows,
            cols: other.cols,
        }
    }

    pub fn add(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!((self.nrows(), self.cols), (other.nrows(), other.cols));
        let mut m = self.clone();
        for (a, b) in m.rows.iter_mut().zip(&other.rows) {
            a.add_assign(b);
        }
        m
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.cols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        F2Matrix {
            rows,
            cols: self.cols,
        }
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.nrows(), other.nrows());
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.concat(b))
            .collect();
        F2Matrix {
            rows,
            cols: self.cols + other.cols,
        }
    }

    /// Reduced row echelon form with leftmost pivots; returns the pivot columns.
    pub fn rref(&self) -> (F2Matrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            let pr = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.add_assign(&pr);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (
            F2Matrix {
                rows,
                cols: self.cols,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        echelon_rank(self.rows.clone())
    }

    /// Basis of `{v : self * v = 0}`, one vector per row, in reduced form.
    pub fn kernel_basis(&self) -> F2Matrix {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::unit(self.cols, free);
            for (k, &p) in pivots.iter().enumerate() {
                if r.rows[k].get(free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        F2Matrix {
            rows: basis,
            cols: self.cols,
        }
    }

    /// Basis of the column space, one vector per row.
    pub fn image_basis(&self) -> F2Matrix {
        self.transpose().row_space_basis()
    }

    /// Basis of the row space (nonzero rows of the rref).
    pub fn row_space_basis(&self) -> F2Matrix {
        let (r, pivots) = self.rref();
        let rows = r.rows.into_iter().take(pivots.len()).collect();
        F2Matrix {
            rows,
            cols: self.cols,
        }
    }

    /// Some `x` with `self * x = b`, if one exists.
    pub fn solve(&self, b: &BitVec) -> Option<BitVec> {
        assert_eq!(b.len(), self.nrows());
        let aug = self.hstack(&F2Matrix::from_cols(self.nrows(), std::slice::from_ref(b)));
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BitVec::zeros(self.cols);
        for (k, &p) in pivots.iter().enumerate() {
            if r.rows[k].get(self.cols) {
                x.set(p, true);
            }
        }
        Some(x)
    }

    /// Rows of `self` (spanning `Z`) completing a basis of `sub` (spanning `B ⊆ Z`)
    /// to a basis of `Z`. The returned rows span a complement of `B` in `Z`.
    pub fn subquotient_basis(&self, sub: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, sub.cols);
        let mut ech = Echelon::new(self.cols);
        for r in sub.rows() {
            ech.insert(r.clone());
        }
        let mut out = Vec::new();
        for r in self.rows() {
            if ech.insert(r.clone()) {
                out.push(r.clone());
            }
        }
        F2Matrix {
            rows: out,
            cols: self.cols,
        }
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.nrows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

fn echelon_rank(rows: Vec<BitVec>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut e = Echelon::new(cols);
    rows.into_iter().filter(|r| e.insert(r.clone())).count()
}

/// Incrementally built echelon basis keyed by leading bit.
#[derive(Clone, Debug)]
struct Echelon {
    by_lead: Vec<Option<BitVec>>,
}

impl Echelon {
    fn new(cols: usize) -> Self {
        Echelon {
            by_lead: vec![None; cols],
        }
    }

    fn reduce(&self, mut v: BitVec) -> BitVec {
        while let Some(l) = v.first_one() {
            match &self.by_lead[l] {
                Some(r) => v.add_assign(r),
                None => break,
            }
        }
        v
    }

    /// Adds `v`; returns whether it was independent.
    fn insert(&mut self, v: BitVec) -> bool {
        let v = self.reduce(v);
        match v.first_one() {
            Some(l) => {
                self.by_lead[l] = Some(v);
                true
            }
            None => false,
        }
    }
}

/// An ordered list of linearly independent vectors with coordinate extraction.
#[derive(Clone, Debug)]
pub struct Basis {
    vectors: F2Matrix,
    // echelon rows paired with the combination of original vectors producing them
    by_lead: Vec<Option<(BitVec, BitVec)>>,
}

impl Basis {
    /// Panics if the rows are dependent.
    pub fn new(vectors: F2Matrix) -> Self {
        let n = vectors.nrows();
        let mut by_lead: Vec<Option<(BitVec, BitVec)>> = vec![None; vectors.ncols()];
        for (i, r) in vectors.rows().iter().enumerate() {
            let mut v = r.clone();
            let mut t = BitVec::unit(n, i);
            while let Some(l) = v.first_one() {
                match &by_lead[l] {
                    Some((er, et)) => {
                        v.add_assign(er);
                        t.add_assign(et);
                    }
                    None => break,
                }
            }
            let l = v
                .first_one()
                .expect("Basis::new: rows are linearly dependent");
            by_lead[l] = Some((v, t));
        }
        Basis { vectors, by_lead }
    }

    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &F2Matrix {
        &self.vectors
    }

    /// Coefficients `c` with `v = sum c_i * vectors[i]`, if `v` is in the span.
    pub fn coords(&self, v: &BitVec) -> Option<BitVec> {
        let mut v = v.clone();
        let mut acc = BitVec::zeros(self.len());
        while let Some(l) = v.first_one() {
            let (er, et) = self.by_lead[l].as_ref()?;
            v.add_assign(er);
            acc.add_assign(et);
        }
        Some(acc)
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.coords(v).is_some()
    }
}

/// Basis of the intersection of two row spaces in the same ambient space.
pub fn intersect_row_spaces(u: &F2Matrix, v: &F2Matrix) -> F2Matrix {
    assert_eq!(u.ncols(), v.ncols());
    let n = u.ncols();
    if u.nrows() == 0 || v.nrows() == 0 {
        return F2Matrix::zeros(0, n);
    }
    // (alpha, beta) with alpha*U + beta*V = 0 gives alpha*U in both spaces
    let stacked = u.vstack(v).transpose();
    let ker = stacked.kernel_basis();
    let mut rows = Vec::new();
    for k in ker.rows() {
        let alpha = k.slice(0, u.nrows());
        let mut w = BitVec::zeros(n);
        for i in alpha.ones() {
            w.add_assign(u.row(i));
        }
        rows.push(w);
    }
    F2Matrix::from_rows(n, rows).row_space_basis()
}

/// Quotient data for `Z / B` with `B ⊆ Z`: a complement basis and coordinates mod `B`.
#[derive(Clone, Debug)]
pub struct Subquotient {
    complement: F2Matrix,
    full: Basis,
}

impl Subquotient {
    /// `z` and `b` are row bases (not necessarily independent) of `Z ⊇ B`.
    pub fn new(z: &F2Matrix, b: &F2Matrix) -> Self {
        let b = b.row_space_basis();
        let complement = z.subquotient_basis(&b);
        let full = Basis::new(complement.vstack(&b));
        Subquotient { complement, full }
    }

    /// A canonical complement: `Z` reduced modulo the echelon form of `B`,
    /// then put in reduced echelon form. Each representative has a distinct
    /// leading coordinate that is not a pivot of `B`.
    pub fn canonical(z: &F2Matrix, b: &F2Matrix) -> Self {
        let (rb, piv) = b.rref();
        let rb = F2Matrix::from_rows(b.cols, rb.rows[..piv.len()].to_vec());
        let reduced: Vec<BitVec> = z
            .rows()
            .iter()
            .map(|r| {
                let mut v = r.clone();
                for (row, &p) in rb.rows().iter().zip(&piv) {
                    if v.get(p) {
                        v.add_assign(row);
                    }
                }
                v
            })
            .collect();
        let complement = F2Matrix::from_rows(z.cols, reduced).row_space_basis();
        let full = Basis::new(complement.vstack(&rb));
        Subquotient { complement, full }
    }

    pub fn dim(&self) -> usize {
        self.complement.nrows()
    }

    /// Leading coordinate of each representative.
    pub fn leading(&self) -> Vec<usize> {
        self.complement
            .rows()
            .iter()
            .map(|r| r.first_one().expect("nonzero representative"))
            .collect()
    }

    /// Representatives of a basis of the quotient.
    pub fn representatives(&self) -> &F2Matrix {
        &self.complement
    }

    /// Coordinates of the class of `v` in the quotient basis; `None` if `v ∉ Z`.
    pub fn class_of(&self, v: &BitVec) -> Option<BitVec> {
        let c = self.full.coords(v)?;
        Some(c.slice(0, self.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&str]) -> F2Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        F2Matrix::from_rows(
            cols,
            rows.iter()
                .map(|r| BitVec::from_bools(&r.chars().map(|c| c == '1').collect::<Vec<_>>()))
                .collect(),
        )
    }

    #[test]
    fn rref_leftmost_pivots() {
        let a = m(&["0110", "0101", "1000"]);
        let (r, piv) = a.rref();
        assert_eq!(piv, vec![0, 1, 2]);
        assert_eq!(r, m(&["1000", "0101", "0011"]));
    }

    #[test]
    fn kernel_of_small_matrix() {
        let a = m(&["110", "011"]);
        let k = a.kernel_basis();
        assert_eq!(k.nrows(), 1);
        assert_eq!(k.row(0), &BitVec::from_bools(&[true, true, true]));
    }

    #[test]
    fn solve_inconsistent() {
        let a = m(&["10", "10"]);
        assert!(a.solve(&BitVec::from_bools(&[true, false])).is_none());
        assert!(a.solve(&BitVec::from_bools(&[true, true])).is_some());
    }

    #[test]
    fn subquotient_complement() {
        let z = m(&["100", "010", "001"]);
        let b = m(&["110"]);
        let sq = Subquotient::new(&z, &b);
        assert_eq!(sq.dim(), 2);
        let c = sq
            .class_of(&BitVec::from_bools(&[true, true, false]))
            .unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn intersection_of_planes() {
        let u = m(&["100", "010"]);
        let v = m(&["010", "001"]);
        let w = intersect_row_spaces(&u, &v);
        assert_eq!(w, m(&["010"]));
    }

    #[test]
    fn empty_shapes() {
        let a = F2Matrix::zeros(0, 3);
        assert_eq!(a.kernel_basis().nrows(), 3);
        let b = F2Matrix::zeros(2, 0);
        assert_eq!(b.kernel_basis().nrows(), 0);
        assert_eq!(b.rank(), 0);
    }
}
