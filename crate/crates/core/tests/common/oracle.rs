//! A deliberately naive reimplementation of `Sym^k(ρ̄)` and of Jordan forms
//! over `F_p`, sharing no code with the library. Matrices are row-major
//! `Vec<Vec<u64>>` with entries in `0..p`.

use std::collections::{BTreeMap, HashMap};

pub type Mat = Vec<Vec<u64>>;

fn compositions(n: usize, k: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in (0..=k).rev() {
        for mut rest in compositions(n - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

type Poly = HashMap<Vec<u32>, u64>;

fn mul(p: u64, a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = out.entry(e).or_insert(0);
            *c = (*c + ca * cb) % p;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// The matrix of `γ` on degree-`k` monomials in `e_1..e_{p-1}`, where
/// `γ e_i = e_{i+1}` and `γ e_{p-1} = -(e_1 + ... + e_{p-1})`.
pub fn sym_gamma(p: u64, k: u32) -> Mat {
    let n = (p - 1) as usize;
    let basis = compositions(n, k);
    let index: HashMap<&Vec<u32>, usize> = basis.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let image_of_var = |i: usize| -> Poly {
        let mut f = Poly::new();
        if i + 1 < n {
            let mut e = vec![0; n];
            e[i + 1] = 1;
            f.insert(e, 1);
        } else {
            for j in 0..n {
                let mut e = vec![0; n];
                e[j] = 1;
                f.insert(e, p - 1);
            }
        }
        f
    };
    let mut m = vec![vec![0; basis.len()]; basis.len()];
    for (col, exps) in basis.iter().enumerate() {
        let mut f: Poly = [(vec![0; n], 1)].into_iter().collect();
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                f = mul(p, &f, &image_of_var(i));
            }
        }
        for (e, c) in f {
            m[index[&e]][col] = c;
        }
    }
    m
}

pub fn mat_mul(p: u64, a: &Mat, b: &Mat) -> Mat {
    let (r, inner, c) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = vec![vec![0; c]; r];
    for i in 0..r {
        for t in 0..inner {
            if a[i][t] != 0 {
                for j in 0..c {
                    out[i][j] = (out[i][j] + a[i][t] * b[t][j]) % p;
                }
            }
        }
    }
    out
}

fn inv(p: u64, a: u64) -> u64 {
    (1..p).find(|x| a * x % p == 1).expect("nonzero element of F_p")
}

/// Row echelon form; returns the pivot columns.
fn echelon(p: u64, m: &mut Mat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(src) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, src);
        let s = inv(p, m[r][c]);
        for x in m[r].iter_mut() {
            *x = *x * s % p;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + (p - f) * m[r][j]) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_of_vectors(p: u64, vs: &[Vec<u64>]) -> usize {
    let mut m = vs.to_vec();
    echelon(p, &mut m).len()
}

fn nullspace(p: u64, a: &Mat) -> Vec<Vec<u64>> {
    let n = a.first().map_or(0, Vec::len);
    let mut m = a.clone();
    let pivots = echelon(p, &mut m);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0; n];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[r][f]) % p;
            }
            v
        })
        .collect()
}

fn apply(p: u64, a: &Mat, v: &[u64]) -> Vec<u64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y % p).sum::<u64>() % p).collect()
}

fn power(p: u64, a: &Mat, e: usize) -> Mat {
    let n = a.len();
    let mut out: Mat = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    for _ in 0..e {
        out = mat_mul(p, &out, a);
    }
    out
}

/// A Jordan basis for the nilpotent `n = γ - 1`, returned as the block sizes
/// together with the change of basis `P` (columns) and the Jordan matrix `J`
/// satisfying `n P = P J`.
pub struct JordanForm {
    pub sizes: BTreeMap<usize, usize>,
    pub p_matrix: Mat,
    pub j_matrix: Mat,
}

pub fn jordan_form(p: u64, gamma: &Mat) -> JordanForm {
    let dim = gamma.len();
    let nil: Mat = (0..dim).map(|i| (0..dim).map(|j| (gamma[i][j] + p - u64::from(i == j)) % p).collect()).collect();
    let kernels: Vec<Vec<Vec<u64>>> = (0..=dim).map(|s| nullspace(p, &power(p, &nil, s))).collect();
    let top = (0..=dim).find(|&s| kernels[s].len() == dim).expect("γ - 1 is nilpotent");

    // Chains as (top vector, length), chosen from the longest down.
    let mut chains: Vec<(Vec<u64>, usize)> = Vec::new();
    for s in (1..=top).rev() {
        let mut span: Vec<Vec<u64>> = kernels[s - 1].clone();
        for (v, t) in &chains {
            let mut w = v.clone();
            for _ in 0..t - s {
                w = apply(p, &nil, &w);
            }
            span.push(w);
        }
        for cand in &kernels[s] {
            let before = rank_of_vectors(p, &span);
            span.push(cand.clone());
            if rank_of_vectors(p, &span) > before {
                chains.push((cand.clone(), s));
            } else {
                span.pop();
            }
        }
    }

    let mut cols: Vec<Vec<u64>> = Vec::new();
    let mut j_matrix = vec![vec![0; dim]; dim];
    let mut sizes = BTreeMap::new();
    for (v, t) in &chains {
        *sizes.entry(*t).or_insert(0) += 1;
        let mut chain = vec![v.clone()];
        for _ in 1..*t {
            let next = apply(p, &nil, chain.last().unwrap());
            chain.push(next);
        }
        // Columns N^{t-1} v, ..., N v, v: each maps to the one before it.
        let start = cols.len();
        for (i, w) in chain.into_iter().rev().enumerate() {
            if i > 0 {
                j_matrix[start + i - 1][start + i] = 1;
            }
            cols.push(w);
        }
    }
    let p_matrix: Mat = (0..dim).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    JordanForm { sizes, p_matrix, j_matrix }
}

/// Checks `P` is invertible and `(γ - 1) P = P J`.
pub fn verify(p: u64, gamma: &Mat, form: &JordanForm) -> bool {
    let dim = gamma.len();
    let nil: Mat = (0..dim).map(|i| (0..dim).map(|j| (gamma[i][j] + p - u64::from(i == j)) % p).collect()).collect();
    let columns: Vec<Vec<u64>> = (0..dim).map(|j| form.p_matrix.iter().map(|r| r[j]).collect()).collect();
    rank_of_vectors(p, &columns) == dim
        && mat_mul(p, &nil, &form.p_matrix) == mat_mul(p, &form.p_matrix, &form.j_matrix)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
