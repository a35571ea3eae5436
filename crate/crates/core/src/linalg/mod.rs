//! Dense matrices over the coefficient rings of [`crate::ring`].
//!
//! The generic [`Matrix`] supports Smith normal form over a local ring,
//! which is all that kernels, images and linear solves need when every
//! nonzero element is a unit times a power of `p`. Large computations over
//! the prime field go through [`fp`], which stores residues as `u32` and is
//! written for speed.

use std::fmt;

use crate::ring::{CoeffRing, ResidueRing};

pub mod fp;

pub use fp::{Echelon, FpMatrix, SparseFp};

#[derive(Clone)]
pub struct Matrix<R: CoeffRing> {
    ring: R,
    rows: usize,
    cols: usize,
    data: Vec<R::Elem>,
}

impl<R: CoeffRing> PartialEq for Matrix<R> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl<R: CoeffRing> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<R: CoeffRing> fmt::Display for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|a| self.ring.format_elem(a)).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<R: CoeffRing> Matrix<R> {
    pub fn zeros(ring: R, rows: usize, cols: usize) -> Self {
        let data = vec![ring.zero(); rows * cols];
        Matrix { ring, rows, cols, data }
    }

    pub fn identity(ring: R, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = m.ring.one();
        }
        m
    }

    pub fn from_fn(ring: R, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R::Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { ring, rows, cols, data }
    }

    pub fn from_rows(ring: R, rows: &[Vec<R::Elem>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let data = rows.iter().flat_map(|r| r.iter().cloned()).collect();
        Matrix { ring, rows: rows.len(), cols, data }
    }

    pub fn from_i64(ring: R, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(ring.clone(), rows.len(), cols, |i, j| ring.from_i64(rows[i][j]))
    }

    /// The matrix whose columns are the given vectors.
    pub fn from_columns(ring: R, n: usize, cols: &[Vec<R::Elem>]) -> Self {
        Self::from_fn(ring, n, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &R::Elem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[R::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<R::Elem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<R::Elem>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| self.ring.is_zero(a))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.ring.clone(), self.rows)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| self.ring.add(a, b)).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| self.ring.sub(a, b)).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn neg(&self) -> Self {
        let data = self.data.iter().map(|a| self.ring.neg(a)).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let data = self.data.iter().map(|a| self.ring.mul(a, c)).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.ring.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if self.ring.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !self.ring.is_zero(b) {
                        let idx = i * out.cols + j;
                        let t = self.ring.mul(a, b);
                        self.ring.add_assign(&mut out.data[idx], &t);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[R::Elem]) -> Vec<R::Elem> {
        assert_eq!(v.len(), self.cols, "shape mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.ring.zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !self.ring.is_zero(a) && !self.ring.is_zero(b) {
                        self.ring.add_assign(&mut acc, &self.ring.mul(a, b));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: u64) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(self.ring.clone(), self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ring.clone(), self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Block-diagonal direct sum.
    pub fn block_diag(ring: R, blocks: &[&Matrix<R>]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(ring, n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.ring.clone(), self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn map_ring<S: CoeffRing>(&self, target: S, f: impl Fn(&R::Elem) -> S::Elem) -> Matrix<S> {
        let data = self.data.iter().map(f).collect();
        Matrix { ring: target, rows: self.rows, cols: self.cols, data }
    }

    /// Reduction to the residue field `F_p`.
    pub fn reduce_mod_p(&self) -> Matrix<ResidueRing> {
        let fp = ResidueRing::prime_field(self.ring.prime());
        self.map_ring(fp, |a| self.ring.residue(a))
    }

    pub fn to_fp(&self) -> FpMatrix {
        let p = self.ring.prime() as u32;
        let mut m = FpMatrix::zeros(p, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.ring.residue(self.get(i, j)) as u32);
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] -= f * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, f: &R::Elem) {
        for j in 0..self.cols {
            let s = self.get(src, j);
            if !self.ring.is_zero(s) {
                let t = self.ring.mul(f, s);
                let idx = dst * self.cols + j;
                self.data[idx] = self.ring.sub(&self.data[idx], &t);
            }
        }
    }

    /// col[dst] -= f * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, f: &R::Elem) {
        for i in 0..self.rows {
            let s = self.get(i, src);
            if !self.ring.is_zero(s) {
                let t = self.ring.mul(f, s);
                let idx = i * self.cols + dst;
                self.data[idx] = self.ring.sub(&self.data[idx], &t);
            }
        }
    }

    /// Smith normal form `P A Q = D` over the local coefficient ring.
    ///
    /// Pivots are chosen with minimal valuation, so every elimination step
    /// is an exact division.
    pub fn smith(&self) -> Smith<R> {
        let ring = self.ring.clone();
        let mut a = self.clone();
        let mut p = Self::identity(ring.clone(), self.rows);
        let mut p_inv = Self::identity(ring.clone(), self.rows);
        let mut q = Self::identity(ring.clone(), self.cols);
        let n = self.rows.min(self.cols);
        let mut rank = 0;
        for t in 0..n {
            let mut best: Option<(u32, usize, usize)> = None;
            'search: for i in t..a.rows {
                for j in t..a.cols {
                    if let Some(v) = ring.valuation(a.get(i, j)) {
                        if best.map_or(true, |(bv, _, _)| v < bv) {
                            best = Some((v, i, j));
                            if v == 0 {
                                break 'search;
                            }
                        }
                    }
                }
            }
            let Some((_, pi, pj)) = best else { break };
            a.swap_rows(t, pi);
            p.swap_rows(t, pi);
            p_inv.swap_cols(t, pi);
            a.swap_cols(t, pj);
            q.swap_cols(t, pj);
            let pivot = a.get(t, t).clone();
            for i in t + 1..a.rows {
                if ring.is_zero(a.get(i, t)) {
                    continue;
                }
                let f = ring.exact_div(a.get(i, t), &pivot).expect("minimal-valuation pivot divides");
                a.row_axpy(i, t, &f);
                p.row_axpy(i, t, &f);
                // P^{-1} picks up the inverse operation on columns.
                let neg = ring.neg(&f);
                p_inv.col_axpy(t, i, &neg);
            }
            for j in t + 1..a.cols {
                if ring.is_zero(a.get(t, j)) {
                    continue;
                }
                let f = ring.exact_div(a.get(t, j), &pivot).expect("minimal-valuation pivot divides");
                a.col_axpy(j, t, &f);
                q.col_axpy(j, t, &f);
            }
            rank += 1;
        }
        let diag = (0..n).map(|t| a.get(t, t).clone()).collect();
        Smith { diag, rank, p, p_inv, q }
    }

    /// Basis of the saturated kernel `{x : A x = 0}` as matrix columns,
    /// normalised to reduced echelon form with unit pivots.
    pub fn kernel(&self) -> Matrix<R> {
        let s = self.smith();
        let idx: Vec<usize> = (s.rank..self.cols).collect();
        let k = s.q.select_columns(&idx);
        saturated_rref(&k.transpose()).transpose()
    }

    /// Some solution of `A x = b`, or `None` if none exists over the ring.
    /// Free coordinates are set to zero in the Smith basis.
    pub fn solve(&self, b: &[R::Elem]) -> Option<Vec<R::Elem>> {
        self.smith().solve(b)
    }

    pub fn rank_mod_p(&self) -> usize {
        self.to_fp().rank()
    }
}

/// Output of [`Matrix::smith`]: `P A Q = diag(diag)` with `rank` nonzero
/// diagonal entries in non-decreasing valuation order.
#[derive(Clone, Debug)]
pub struct Smith<R: CoeffRing> {
    pub diag: Vec<R::Elem>,
    pub rank: usize,
    pub p: Matrix<R>,
    pub p_inv: Matrix<R>,
    pub q: Matrix<R>,
}

impl<R: CoeffRing> Smith<R> {
    pub fn valuations(&self, ring: &R) -> Vec<Option<u32>> {
        self.diag.iter().map(|d| ring.valuation(d)).collect()
    }

    pub fn solve(&self, b: &[R::Elem]) -> Option<Vec<R::Elem>> {
        let ring = self.p.ring().clone();
        let c = self.p.mul_vec(b);
        let cols = self.q.rows();
        let mut y = vec![ring.zero(); cols];
        for (t, ct) in c.iter().enumerate() {
            if t < self.rank {
                y[t] = ring.exact_div(ct, &self.diag[t])?;
            } else if !ring.is_zero(ct) {
                return None;
            }
        }
        Some(self.q.mul_vec(&y))
    }
}

/// Reduced row-echelon form of a matrix whose rows span a saturated lattice.
///
/// Each pivot is a unit; zero rows are dropped. Over a field this is the
/// usual reduced echelon form. Rows that have no unit entry after reduction
/// are kept at the end in their reduced state.
pub fn saturated_rref<R: CoeffRing>(m: &Matrix<R>) -> Matrix<R> {
    let ring = m.ring().clone();
    let mut a = m.clone();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(pr) = (r..a.rows).find(|&i| ring.is_unit(a.get(i, c))) else { continue };
        a.swap_rows(r, pr);
        let inv = ring.inverse(a.get(r, c)).unwrap();
        for j in 0..a.cols {
            let v = ring.mul(a.get(r, j), &inv);
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i != r && !ring.is_zero(a.get(i, c)) {
                let f = a.get(i, c).clone();
                a.row_axpy(i, r, &f);
            }
        }
        r += 1;
    }
    let keep: Vec<Vec<R::Elem>> =
        (0..a.rows).filter(|&i| a.row(i).iter().any(|x| !ring.is_zero(x))).map(|i| a.row(i).to_vec()).collect();
    if keep.is_empty() {
        return Matrix::zeros(ring, 0, m.cols);
    }
    Matrix::from_rows(ring, &keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PLocal;
    use proptest::prelude::*;

    #[test]
    fn smith_of_integer_matrix() {
        let r = PLocal::new(3);
        let a = Matrix::from_i64(r, &[&[3, 6], &[9, 3]]);
        let s = a.smith();
        let d = s.p.mul(&a).mul(&s.q);
        assert_eq!(s.rank, 2);
        assert_eq!(s.valuations(&r), vec![Some(1), Some(1)]);
        assert!(d.get(0, 1).is_zero() && d.get(1, 0).is_zero());
        assert!(s.p.mul(&s.p_inv).is_identity());
    }

    #[test]
    fn kernel_is_saturated() {
        let r = ResidueRing::new(3, 2);
        // 3x + 3y = 0 mod 9 has the saturated kernel spanned by (1, -1).
        let a = Matrix::from_i64(r, &[&[3, 3]]);
        let k = a.kernel();
        assert_eq!(k.cols(), 1);
        assert_eq!(k.column(0), vec![1, 8]);
    }

    #[test]
    fn solve_respects_integrality() {
        let r = PLocal::new(3);
        let a = Matrix::from_i64(r, &[&[3, 0], &[0, 1]]);
        assert!(a.solve(&[r.from_i64(1), r.from_i64(0)]).is_none());
        let x = a.solve(&[r.from_i64(6), r.from_i64(5)]).unwrap();
        assert_eq!(x, vec![r.from_i64(2), r.from_i64(5)]);
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..5, 1usize..5).prop_flat_map(|(n, m)| proptest::collection::vec(proptest::collection::vec(-6i64..6, m), n))
    }

    proptest! {
        #[test]
        fn smith_factorisation_holds(rows in small_matrix()) {
            let r = ResidueRing::new(3, 3);
            let refs: Vec<&[i64]> = rows.iter().map(|v| v.as_slice()).collect();
            let a = Matrix::from_i64(r, &refs);
            let s = a.smith();
            let d = s.p.mul(&a).mul(&s.q);
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    let expect = if i == j && i < s.diag.len() { s.diag[i] } else { 0 };
                    prop_assert_eq!(*d.get(i, j), expect);
                }
            }
            prop_assert!(s.p.mul(&s.p_inv).is_identity());
            let k = a.kernel();
            prop_assert!(a.mul(&k).is_zero());
        }
    }
}
