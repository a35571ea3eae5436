//! Finite free modules over `k[C_p]`, where the group generator acts by an
//! operator `gamma` with `gamma^p = 1`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{saturated_rref, Matrix, SparseFp};
use crate::ring::CoeffRing;

mod endo;
mod tate;

pub use endo::{endo_transfer_ideal_check, EndoReport};
pub use tate::{tate_cohomology, Parity, TateGroup, TateSummand};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpError {
    #[error("gamma does not have order {order}: {detail}")]
    NotOrderP { order: u64, detail: String },
    #[error("gamma must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{0} labels supplied for a module of rank {1}")]
    LabelCount(usize, usize),
    #[error("check failed: {detail} (counterexample {counterexample})")]
    CheckFailed { detail: String, counterexample: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precision too low to recover the lattice: {0}")]
    PrecisionLoss(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Trivial,
    Rhobar,
    Regular,
}

/// Above this rank, `gamma^p = 1` is verified on random vectors rather than
/// by forming the matrix power.
const EXACT_ORDER_CHECK_LIMIT: usize = 160;
const ORDER_CHECK_VECTORS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct CpModule<R: CoeffRing> {
    gamma: Matrix<R>,
    labels: Option<Vec<String>>,
}

impl<R: CoeffRing> CpModule<R> {
    pub fn new(gamma: Matrix<R>, labels: Option<Vec<String>>) -> Result<Self, CpError> {
        if !gamma.is_square() {
            return Err(CpError::NotSquare { rows: gamma.rows(), cols: gamma.cols() });
        }
        if let Some(l) = &labels {
            if l.len() != gamma.rows() {
                return Err(CpError::LabelCount(l.len(), gamma.rows()));
            }
        }
        check_order(&gamma)?;
        Ok(CpModule { gamma, labels })
    }

    /// For matrices induced from a ring action whose order was already
    /// verified on generators.
    pub(crate) fn from_verified_action(gamma: Matrix<R>, labels: Option<Vec<String>>) -> Self {
        debug_assert!(gamma.is_square());
        CpModule { gamma, labels }
    }

    pub fn ring(&self) -> &R {
        self.gamma.ring()
    }

    pub fn prime(&self) -> u64 {
        self.ring().prime()
    }

    pub fn dim(&self) -> usize {
        self.gamma.rows()
    }

    pub fn gamma(&self) -> &Matrix<R> {
        &self.gamma
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `gamma - 1`.
    pub fn n_operator(&self) -> Matrix<R> {
        self.gamma.sub(&Matrix::identity(self.ring().clone(), self.dim()))
    }

    /// `1 + gamma + ... + gamma^{p-1}`.
    pub fn transfer_operator(&self) -> Matrix<R> {
        let mut acc = Matrix::identity(self.ring().clone(), self.dim());
        let mut g = acc.clone();
        for _ in 1..self.prime() {
            g = g.mul(&self.gamma);
            acc = acc.add(&g);
        }
        acc
    }

    /// Basis of the fixed submodule, as columns in reduced echelon form.
    pub fn fixed_points(&self) -> Matrix<R> {
        self.n_operator().kernel()
    }

    /// Rank of the fixed submodule over the coefficient ring.
    pub fn fixed_rank(&self) -> usize {
        self.fixed_points().cols()
    }

    /// Generators of the image of the transfer, as columns. Over a field the
    /// basis is in reduced echelon form; over `Z/p^N` or `Z_(p)` the columns
    /// are the Smith-adapted generators `d_t * P^{-1} e_t`.
    pub fn norm_image(&self) -> Matrix<R> {
        image_generators(&self.transfer_operator())
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let gamma = Matrix::block_diag(self.ring().clone(), &[&self.gamma, &other.gamma]);
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        CpModule { gamma, labels }
    }

    pub fn n_operator_sparse(&self) -> SparseFp {
        let ring = self.ring();
        let p = ring.prime() as u32;
        let d = self.dim();
        let rows = (0..d)
            .map(|i| {
                let mut r: Vec<(u32, u32)> = Vec::new();
                for j in 0..d {
                    let mut v = ring.residue(self.gamma.get(i, j)) as u32;
                    if i == j {
                        v = (v + p - 1) % p;
                    }
                    if v != 0 {
                        r.push((j as u32, v));
                    }
                }
                r
            })
            .collect();
        SparseFp::from_rows(p, d, rows)
    }
}

fn check_order<R: CoeffRing>(gamma: &Matrix<R>) -> Result<(), CpError> {
    let ring = gamma.ring().clone();
    let p = ring.prime();
    let n = gamma.rows();
    if n <= EXACT_ORDER_CHECK_LIMIT {
        if gamma.pow(p).is_identity() {
            return Ok(());
        }
        return Err(CpError::NotOrderP { order: p, detail: "gamma^p differs from the identity".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_0d3);
    for _ in 0..ORDER_CHECK_VECTORS {
        let v: Vec<R::Elem> = (0..n).map(|_| ring.from_i64(rng.gen_range(0..(p * p) as i64))).collect();
        let mut w = v.clone();
        for _ in 0..p {
            w = gamma.mul_vec(&w);
        }
        if w != v {
            return Err(CpError::NotOrderP { order: p, detail: "gamma^p moves a test vector".into() });
        }
    }
    Ok(())
}

pub(crate) fn image_generators<R: CoeffRing>(a: &Matrix<R>) -> Matrix<R> {
    let ring = a.ring().clone();
    let s = a.smith();
    let cols: Vec<Vec<R::Elem>> = (0..s.rank)
        .map(|t| s.p_inv.column(t).iter().map(|x| ring.mul(x, &s.diag[t])).collect())
        .collect();
    if cols.is_empty() {
        return Matrix::zeros(ring, a.rows(), 0);
    }
    let m = Matrix::from_columns(ring.clone(), a.rows(), &cols);
    if is_field(&ring) {
        saturated_rref(&m.transpose()).transpose()
    } else {
        m
    }
}

fn is_field<R: CoeffRing>(ring: &R) -> bool {
    // Among the rings in use, only F_p has p = 0.
    ring.is_zero(&ring.from_i64(ring.prime() as i64))
}

pub fn standard_module<R: CoeffRing>(kind: ModuleKind, ring: R) -> CpModule<R> {
    let p = ring.prime() as usize;
    let gamma = match kind {
        ModuleKind::Trivial => Matrix::identity(ring.clone(), 1),
        ModuleKind::Regular => Matrix::from_fn(ring.clone(), p, p, |i, j| {
            if i == (j + 1) % p {
                ring.one()
            } else {
                ring.zero()
            }
        }),
        ModuleKind::Rhobar => {
            let n = p - 1;
            // Column j holds gamma(e_{j+1}): e_{j+2} for j < n-1, and -sum e_i for the last.
            Matrix::from_fn(ring.clone(), n, n, |i, j| {
                if j == n - 1 {
                    ring.from_i64(-1)
                } else if i == j + 1 {
                    ring.one()
                } else {
                    ring.zero()
                }
            })
        }
    };
    let labels = match kind {
        ModuleKind::Trivial => vec!["1".to_string()],
        ModuleKind::Regular => (0..p).map(|i| format!("g{i}")).collect(),
        ModuleKind::Rhobar => (1..p).map(|i| format!("e{i}")).collect(),
    };
    CpModule::new(gamma, Some(labels)).expect("standard modules have order p")
}

/// Multiplicities of the indecomposables `J_i = F_p[C_p]/(gamma-1)^i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JordanType {
    pub p: u64,
    pub counts: BTreeMap<usize, usize>,
}

impl JordanType {
    pub fn from_ranks(p: u64, dim: usize, ranks: &[usize]) -> Self {
        // r[0] = dim, r[i] = rank N^i, zero from r[p] on.
        let r = |i: usize| if i == 0 { dim } else { ranks.get(i - 1).copied().unwrap_or(0) };
        let mut counts = BTreeMap::new();
        for i in 1..=p as usize {
            let c = r(i - 1) + r(i + 1) - 2 * r(i);
            if c > 0 {
                counts.insert(i, c);
            }
        }
        JordanType { p, counts }
    }

    pub fn count(&self, i: usize) -> usize {
        self.counts.get(&i).copied().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.counts.iter().map(|(i, c)| i * c).sum()
    }

    pub fn free(&self) -> usize {
        self.count(self.p as usize)
    }

    pub fn combine(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let mut counts = self.counts.clone();
        for (i, c) in &other.counts {
            *counts.entry(*i).or_default() += c;
        }
        JordanType { p: self.p, counts }
    }
}

/// Jordan type of the reduction mod `p` of `gamma - 1`, from the ranks of
/// its powers.
pub fn jordan_type<R: CoeffRing>(m: &CpModule<R>) -> Result<JordanType, CpError> {
    let p = m.prime();
    let n = m.n_operator_sparse();
    let ranks = n.power_ranks(p as usize);
    if ranks[p as usize - 1] != 0 {
        // (gamma - 1)^p = gamma^p - 1 in characteristic p.
        return Err(CpError::NotOrderP { order: p, detail: "(gamma - 1)^p is nonzero mod p".into() });
    }
    Ok(JordanType::from_ranks(p, m.dim(), &ranks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{PLocal, ResidueRing};
    use proptest::prelude::*;

    fn fp(p: u64) -> ResidueRing {
        ResidueRing::prime_field(p)
    }

    #[test]
    fn standard_modules() {
        let r = standard_module(ModuleKind::Rhobar, fp(3));
        assert_eq!(r.gamma(), &Matrix::from_i64(fp(3), &[&[0, -1], &[1, -1]]));
        let reg = standard_module(ModuleKind::Regular, fp(3));
        assert_eq!(reg.gamma(), &Matrix::from_i64(fp(3), &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]));
        let r2 = standard_module(ModuleKind::Rhobar, fp(2));
        assert_eq!(r2.gamma(), &Matrix::from_i64(fp(2), &[&[1]]));
    }

    #[test]
    fn rejects_non_order_p() {
        let g = Matrix::from_i64(fp(3), &[&[1, 1], &[0, 1]]);
        assert!(CpModule::new(g.clone(), None).is_ok(), "unipotent of order 3 over F_3");
        let g = Matrix::from_i64(fp(5), &[&[2]]);
        assert!(matches!(CpModule::new(g, None), Err(CpError::NotOrderP { .. })));
    }

    #[test]
    fn jordan_types_of_standard_modules() {
        let t = jordan_type(&standard_module(ModuleKind::Trivial, fp(5))).unwrap();
        assert_eq!(t.counts, BTreeMap::from([(1, 1)]));
        let t = jordan_type(&standard_module(ModuleKind::Regular, fp(5))).unwrap();
        assert_eq!(t.counts, BTreeMap::from([(5, 1)]));
        let t = jordan_type(&standard_module(ModuleKind::Rhobar, fp(5))).unwrap();
        assert_eq!(t.counts, BTreeMap::from([(4, 1)]));
    }

    #[test]
    fn transfer_and_fixed_points() {
        let rb = standard_module(ModuleKind::Rhobar, fp(3));
        assert!(rb.transfer_operator().is_zero());
        let t = standard_module(ModuleKind::Trivial, fp(3));
        assert!(t.transfer_operator().is_zero());
        let reg = standard_module(ModuleKind::Regular, fp(3));
        let fixed = reg.fixed_points();
        assert_eq!(fixed.cols(), 1);
        assert_eq!(fixed.column(0), vec![1, 1, 1]);
        assert_eq!(reg.norm_image().column(0), vec![1, 1, 1]);
    }

    #[test]
    fn integral_fixed_rank_separates_sign_from_trivial() {
        let z2 = PLocal::new(2);
        assert_eq!(standard_module(ModuleKind::Rhobar, z2).fixed_rank(), 0);
        assert_eq!(standard_module(ModuleKind::Trivial, z2).fixed_rank(), 1);
    }

    fn kinds() -> impl Strategy<Value = Vec<ModuleKind>> {
        proptest::collection::vec(
            prop_oneof![Just(ModuleKind::Trivial), Just(ModuleKind::Rhobar), Just(ModuleKind::Regular)],
            1..6,
        )
    }

    proptest! {
        #[test]
        fn jordan_type_is_additive(ks in kinds(), p in prop_oneof![Just(2u64), Just(3), Just(5), Just(7)]) {
            let mods: Vec<_> = ks.iter().map(|&k| standard_module(k, fp(p))).collect();
            let sum = mods.iter().skip(1).fold(mods[0].clone(), |acc, m| acc.direct_sum(m));
            let whole = jordan_type(&sum).unwrap();
            let parts = mods.iter().map(|m| jordan_type(m).unwrap()).reduce(|a, b| a.combine(&b)).unwrap();
            prop_assert_eq!(whole.dim(), sum.dim());
            prop_assert_eq!(whole, parts);
        }

        #[test]
        fn transfer_kills_n(ks in kinds(), p in prop_oneof![Just(3u64), Just(5)]) {
            let r = ResidueRing::new(p, 2);
            let mods: Vec<_> = ks.iter().map(|&k| standard_module(k, r)).collect();
            let m = mods.iter().skip(1).fold(mods[0].clone(), |acc, x| acc.direct_sum(x));
            prop_assert!(m.transfer_operator().mul(&m.n_operator()).is_zero());
            prop_assert!(m.n_operator().mul(&m.transfer_operator()).is_zero());
        }
    }
}
