//! Linear algebra over a prime field `F_p` with `p < 2^16`.
//!
//! Entries are stored as `u32` residues. Row reduction accumulates products
//! without reducing (each update adds less than `p^2`), and only reduces an
//! entry when it is about to be used as a pivot coefficient, which keeps the
//! inner loop a plain multiply-add over a slice.

use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FpMatrix(p={}, ", self.p)?;
        let rows: Vec<String> = (0..self.rows).map(|i| format!("{:?}", self.row(i))).collect();
        write!(f, "[{}])", rows.join(", "))
    }
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

pub(crate) fn pow_mod(a: u32, mut e: u32, p: u32) -> u32 {
    let (mut base, mut acc) = (a as u64 % p as u64, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        assert!(p >= 2 && p < (1 << 16), "prime out of range");
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(p, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                m.data[i * cols + j] = v.rem_euclid(p as i64) as u32;
            }
        }
        m
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| (a + b) % self.p).collect();
        FpMatrix { data, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| (a + self.p - b) % self.p).collect();
        FpMatrix { data, ..self.clone() }
    }

    pub fn scale(&self, c: u32) -> Self {
        let c = c % self.p;
        let data = self.data.iter().map(|a| a * c % self.p).collect();
        FpMatrix { data, ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let p = self.p as u64;
        let mut out = Self::zeros(self.p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for (x, &b) in acc.iter_mut().zip(other.row(k)) {
                    *x += a * b as u64;
                }
            }
            for (j, x) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = (x % p) as u32;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let s: u64 = self.row(i).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum();
                (s % self.p as u64) as u32
            })
            .collect()
    }

    pub fn pow(&self, mut e: u64) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.p, self.rows);
        let mut base = self.clone();
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
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn block_diag(p: u32, blocks: &[&FpMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(p, n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.data[(r0 + i) * m + c0 + j] = b.get(i, j);
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.p, self.cols);
        for i in 0..self.rows {
            e.insert(self.row(i).to_vec());
        }
        e.rank()
    }

    /// Reduced row-echelon basis of the row space.
    pub fn row_space(&self) -> FpMatrix {
        let mut e = Echelon::new(self.p, self.cols);
        for i in 0..self.rows {
            e.insert(self.row(i).to_vec());
        }
        e.to_rref()
    }

    /// Reduced row-echelon basis (as rows) of the column space.
    pub fn column_space(&self) -> FpMatrix {
        self.transpose().row_space()
    }

    /// Basis of `{x : A x = 0}` as rows in reduced row-echelon form.
    pub fn kernel(&self) -> FpMatrix {
        let rref = self.row_space();
        let pivots: Vec<usize> =
            (0..rref.rows).map(|i| rref.row(i).iter().position(|&x| x != 0).unwrap()).collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(self.p, free.len(), self.cols);
        for (k, &f) in free.iter().enumerate() {
            out.data[k * self.cols + f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                let v = rref.get(i, f);
                out.data[k * self.cols + pc] = (self.p - v) % self.p;
            }
        }
        out.row_space()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.p, self.rows)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn to_sparse(&self) -> SparseFp {
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            rows.push(self.row(i).iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, &v)| (j as u32, v)).collect());
        }
        SparseFp { p: self.p, cols: self.cols, rows }
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }
}

/// An incrementally built semi-echelon basis.
///
/// Row `i` has its first nonzero entry (equal to 1) at `pivots[i]`, and is
/// zero at the pivots of all earlier rows, so reducing a vector against the
/// rows in insertion order clears every pivot column.
#[derive(Clone, Debug)]
pub struct Echelon {
    p: u32,
    cols: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(p: u32, cols: usize) -> Self {
        Echelon { p, cols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Reduces `v` in place against the basis; the result is fully reduced
    /// mod `p`.
    pub fn reduce(&self, v: &mut [u32]) {
        let p = self.p;
        let eager = (self.rows.len() as u64 + 1) * (p as u64 * p as u64) >= u32::MAX as u64;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v[pc] % p;
            if c == 0 {
                v[pc] = 0;
                continue;
            }
            let f = p - c;
            // Each update adds less than p^2, so without `eager` no entry can
            // reach 2^32 before the final reduction.
            for (x, &r) in v[pc..].iter_mut().zip(&row[pc..]) {
                *x = x.wrapping_add(f.wrapping_mul(r));
            }
            v[pc] = 0;
            if eager {
                v[pc..].iter_mut().for_each(|x| *x %= p);
            }
        }
        v.iter_mut().for_each(|x| *x %= p);
    }

    /// Inserts `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, mut v: Vec<u32>) -> bool {
        assert_eq!(v.len(), self.cols);
        self.reduce(&mut v);
        let Some(pc) = v.iter().position(|&x| x != 0) else { return false };
        let inv = inv_mod(v[pc], self.p);
        for x in v[pc..].iter_mut() {
            *x = *x * inv % self.p;
        }
        self.rows.push(v);
        self.pivots.push(pc);
        true
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// The basis in reduced row-echelon form, rows ordered by pivot.
    pub fn to_rref(&self) -> FpMatrix {
        let p = self.p;
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.pivots[i]);
        let mut rows: Vec<Vec<u32>> = order.iter().map(|&i| self.rows[i].clone()).collect();
        let pivots: Vec<usize> = order.iter().map(|&i| self.pivots[i]).collect();
        for k in (0..rows.len()).rev() {
            let (before, rest) = rows.split_at_mut(k);
            let pivot_row = &rest[0];
            let pc = pivots[k];
            for r in before.iter_mut() {
                let c = r[pc];
                if c != 0 {
                    let f = p - c;
                    for (x, &y) in r[pc..].iter_mut().zip(&pivot_row[pc..]) {
                        *x = (*x + f * y) % p;
                    }
                }
            }
        }
        let mut m = FpMatrix::zeros(p, rows.len(), self.cols);
        for (i, r) in rows.iter().enumerate() {
            m.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(r);
        }
        m
    }
}

/// Row-compressed sparse matrix over `F_p`.
#[derive(Clone, Debug)]
pub struct SparseFp {
    p: u32,
    cols: usize,
    rows: Vec<Vec<(u32, u32)>>,
}

impl SparseFp {
    pub fn from_rows(p: u32, cols: usize, rows: Vec<Vec<(u32, u32)>>) -> Self {
        SparseFp { p, cols, rows }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        self.rows
            .iter()
            .map(|r| (r.iter().map(|&(j, a)| a as u64 * v[j as usize] as u64).sum::<u64>() % p) as u32)
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        self.rows.iter().map(|r| r.iter().find(|&&(c, _)| c as usize == j).map_or(0, |&(_, a)| a)).collect()
    }

    pub fn transpose(&self) -> SparseFp {
        let mut rows = vec![Vec::new(); self.cols];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                rows[j as usize].push((i as u32, a));
            }
        }
        SparseFp { p: self.p, cols: self.rows.len(), rows }
    }

    /// Ranks of `A, A^2, ..., A^m` for a square matrix, computed by pushing
    /// an echelon basis of each image through `A`.
    pub fn power_ranks(&self, m: usize) -> Vec<usize> {
        assert_eq!(self.rows.len(), self.cols, "square matrix required");
        let at = self.transpose();
        let mut basis = Echelon::new(self.p, self.cols);
        for r in &at.rows {
            let mut v = vec![0u32; self.cols];
            for &(j, a) in r {
                v[j as usize] = a;
            }
            basis.insert(v);
        }
        let mut ranks = vec![basis.rank()];
        while ranks.len() < m {
            if basis.rank() == 0 {
                ranks.push(0);
                continue;
            }
            let mut next = Echelon::new(self.p, self.cols);
            for b in basis.rows() {
                next.insert(self.mul_vec(b));
            }
            ranks.push(next.rank());
            basis = next;
        }
        ranks
    }
}
