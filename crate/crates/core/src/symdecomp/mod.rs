//! Symmetric powers of the reduced regular representation of `C_p`.
//!
//! `Sym^k` is realised on the monomials of degree `k` in `e_1, ..., e_{p-1}`,
//! with the generator acting by `e_i -> e_{i+1}` and
//! `e_{p-1} -> -(e_1 + ... + e_{p-1})`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpmod::{jordan_type, CpError, CpModule, JordanType};
use crate::linalg::{Echelon, Matrix};
use crate::ring::{binomial, monomials_of_degree, CoeffRing, Monomial, MultiPoly, PLocal, ResidueRing, RingAction, RingError, VarSet};

mod cells;

pub use cells::{slice_cells, SliceCellList, SpecialCell};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("pattern violation at p={p}, k={k}: {detail}")]
    PatternViolation { p: u64, k: u32, detail: String },
    #[error("norm element of degree {0} is not fixed by the generator")]
    NotFixed(u32),
    #[error("no witness psi with Tr(psi) = Nm - Tr(e1^p)/p at p={0}")]
    NoWitness(u64),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Module(#[from] CpError),
}

/// Grading weight of each `e_i`.
pub fn e_weight(p: u64) -> i32 {
    (2 * p - 2) as i32
}

pub fn e_vars(p: u64) -> Arc<VarSet> {
    VarSet::indexed("e", (p - 1) as usize, e_weight(p))
}

/// The action `e_i -> e_{i+1}`, `e_{p-1} -> -sum e_j` on `R[e_1, ..., e_{p-1}]`.
pub fn rhobar_action<R: CoeffRing>(ring: R) -> RingAction<R> {
    let p = ring.prime();
    let vars = e_vars(p);
    let n = vars.len();
    let images = (0..n)
        .map(|i| {
            if i + 1 < n {
                MultiPoly::var_index(ring.clone(), vars.clone(), i + 1)
            } else {
                let sum = (0..n).fold(MultiPoly::zero(ring.clone(), vars.clone()), |acc, j| {
                    acc.add(&MultiPoly::var_index(ring.clone(), vars.clone(), j))
                });
                sum.neg()
            }
        })
        .collect();
    RingAction::new(images, p).expect("the reduced regular action has order p")
}

#[derive(Debug, Clone)]
pub struct SymBasis {
    p: u64,
    k: u32,
    vars: Arc<VarSet>,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl SymBasis {
    pub fn new(p: u64, k: u32) -> Self {
        let vars = e_vars(p);
        let monomials = monomials_of_degree(vars.len(), k);
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        SymBasis { p, k, vars, monomials, index }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn labels(&self) -> Vec<String> {
        self.monomials.iter().map(|m| m.format(&self.vars)).collect()
    }

    /// Coordinates of a homogeneous polynomial of degree `k`.
    pub fn coordinates<R: CoeffRing>(&self, f: &MultiPoly<R>) -> Result<Vec<R::Elem>, SymError> {
        let ring = f.ring().clone();
        let f = f.embed(&self.vars)?;
        let mut v = vec![ring.zero(); self.len()];
        for (m, c) in f.terms() {
            let i = self.index_of(m).ok_or_else(|| {
                RingError::Invalid(format!("{} is not of degree {}", m.format(&self.vars), self.k))
            })?;
            v[i] = c.clone();
        }
        Ok(v)
    }

    pub fn polynomial<R: CoeffRing>(&self, ring: R, v: &[R::Elem]) -> MultiPoly<R> {
        let terms = self.monomials.iter().cloned().zip(v.iter().cloned());
        MultiPoly::from_terms(ring, self.vars.clone(), terms)
    }
}

/// `Sym^k` of the reduced regular representation as a module over `ring`.
///
/// The order of the generator is certified on the variables when the
/// action is built, which implies it on every symmetric power; the matrix
/// itself is not raised to the `p`-th power.
pub fn sym_module<R: CoeffRing>(p: u64, k: u32, ring: R) -> CpModule<R> {
    assert_eq!(ring.prime(), p, "ring has the wrong residue characteristic");
    let action = rhobar_action(ring.clone());
    let basis = SymBasis::new(p, k);
    let n = basis.vars.len();
    let d = basis.len();
    let last = action.images()[n - 1].clone();
    let mut last_powers = vec![MultiPoly::one(ring.clone(), basis.vars.clone())];
    for _ in 0..k {
        let next = last_powers.last().unwrap().mul(&last);
        last_powers.push(next);
    }
    let mut gamma = Matrix::zeros(ring.clone(), d, d);
    for (j, m) in basis.monomials.iter().enumerate() {
        let e = m.exponents();
        let mut shifted = vec![0u32; n];
        for i in 0..n - 1 {
            shifted[i + 1] = e[i];
        }
        let image = last_powers[e[n - 1] as usize].mul_term(&Monomial::from_exponents(&shifted), &ring.one());
        for (mono, c) in image.terms() {
            let i = basis.index_of(mono).expect("image stays in degree k");
            gamma.set(i, j, c.clone());
        }
    }
    CpModule::from_verified_action(gamma, Some(basis.labels()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymDecomposition {
    pub p: u64,
    pub k: u32,
    pub dim: usize,
    pub trivial: usize,
    pub rhobar: usize,
    pub free: usize,
    pub jordan: JordanType,
}

/// Decomposes `Sym^k` over `F_p` into trivial, reduced-regular and free
/// summands, failing if the Jordan type leaves the expected three-case
/// pattern.
pub fn decompose_sym(p: u64, k: u32) -> Result<SymDecomposition, SymError> {
    let module = sym_module(p, k, ResidueRing::prime_field(p));
    let jt = jordan_type(&module)?;
    let dim = module.dim();
    let violation = |detail: String| SymError::PatternViolation { p, k, detail };
    let free = jt.free();
    let (trivial, rhobar) = if p == 2 {
        // Over F_2 the trivial and sign modules coincide; tell them apart by
        // the rank of the fixed lattice over Z_(2).
        let ones = jt.count(1);
        let fixed = sym_module(p, k, PLocal::new(p)).fixed_rank();
        let trivial = fixed.checked_sub(free).ok_or_else(|| violation(format!("fixed rank {fixed} below free count {free}")))?;
        let rhobar = ones.checked_sub(trivial).ok_or_else(|| violation("more trivial lattices than size-1 blocks".into()))?;
        (trivial, rhobar)
    } else {
        for (&size, &count) in &jt.counts {
            if size != 1 && size != p as usize - 1 && size != p as usize {
                return Err(violation(format!("{count} Jordan block(s) of size {size}")));
            }
        }
        (jt.count(1), jt.count(p as usize - 1))
    };
    let expected_trivial = usize::from(k as u64 % p == 0);
    let expected_rhobar = usize::from(k as u64 % p == 1);
    if trivial != expected_trivial || rhobar != expected_rhobar {
        return Err(violation(format!(
            "found {trivial} trivial and {rhobar} reduced-regular summands, expected {expected_trivial} and {expected_rhobar}"
        )));
    }
    let total = binomial(k as u64 + p - 2, k as u64) as usize;
    if p as usize * free + trivial + (p as usize - 1) * rhobar != total || dim != total {
        return Err(violation(format!("dimension count fails: {free} free summands in rank {total}")));
    }
    Ok(SymDecomposition { p, k, dim, trivial, rhobar, free, jordan: jt })
}

/// `(e_1 ... e_{p-1} * (-(e_1 + ... + e_{p-1})))^l`, i.e. the `l`-th power of
/// the norm of `e_1`.
pub fn norm_element<R: CoeffRing>(ring: R, l: u32) -> MultiPoly<R> {
    let action = rhobar_action(ring.clone());
    let vars = action.vars().clone();
    let mut nm = action.images()[vars.len() - 1].clone();
    for i in 0..vars.len() {
        nm = nm.mul(&MultiPoly::var_index(ring.clone(), vars.clone(), i));
    }
    nm.pow(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormWitness {
    pub p: u64,
    pub l: u32,
    pub polynomial: MultiPoly<PLocal>,
    pub vector: Vec<<PLocal as CoeffRing>::Elem>,
}

/// The norm power `Nm^l` in `Sym^{lp}`, checked to be fixed and to map
/// nontrivially to the trivial summand, i.e. not to lie in the image of
/// `gamma - 1` modulo `p`.
pub fn norm_fixed_witness(p: u64, l: u32) -> Result<NormWitness, SymError> {
    let ring = PLocal::new(p);
    let k = l * p as u32;
    let basis = SymBasis::new(p, k);
    let nm = norm_element(ring, l);
    let action = rhobar_action(ring);
    if action.apply(&nm, 1)? != nm {
        return Err(SymError::NotFixed(k));
    }
    let vector = basis.coordinates(&nm)?;
    let module = sym_module(p, k, ResidueRing::prime_field(p));
    let n = module.n_operator().to_fp();
    let mut image = Echelon::new(p as u32, basis.len());
    for j in 0..n.cols() {
        image.insert(n.column(j));
    }
    let reduced: Vec<u32> = vector.iter().map(|c| ring.residue(c) as u32).collect();
    if image.contains(&reduced) {
        return Err(SymError::PatternViolation { p, k, detail: "norm lies in the image of gamma - 1".into() });
    }
    Ok(NormWitness { p, l, polynomial: nm, vector })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrNmWitness {
    pub p: u64,
    pub transfer_of_e1p: MultiPoly<PLocal>,
    pub quotient: MultiPoly<PLocal>,
    pub norm: MultiPoly<PLocal>,
    pub psi: MultiPoly<PLocal>,
}

/// Sum of the `p` translates of `f`.
pub fn orbit_sum<R: CoeffRing>(action: &RingAction<R>, f: &MultiPoly<R>) -> Result<MultiPoly<R>, RingError> {
    let mut acc = f.embed(action.vars())?;
    let mut g = acc.clone();
    for _ in 1..action.order() {
        g = action.apply(&g, 1)?;
        acc = acc.add(&g);
    }
    Ok(acc)
}

/// Shows that `Tr(e_1^p)` is divisible by `p` and that the quotient differs
/// from the norm `e_1 ... e_p` by a transfer, returning an explicit `psi`
/// with `Nm - Tr(e_1^p)/p = Tr(psi)` over `Z_(p)`.
pub fn tr_nm_witness(p: u64) -> Result<TrNmWitness, SymError> {
    let ring = PLocal::new(p);
    let action = rhobar_action(ring);
    let vars = action.vars().clone();
    let e1p = MultiPoly::var_index(ring, vars.clone(), 0).pow(p as u32);
    let transfer_of_e1p = orbit_sum(&action, &e1p)?;
    let quotient = transfer_of_e1p.divide_by_p()?;
    let norm = norm_element(ring, 1);
    let target = norm.sub(&quotient);

    let basis = SymBasis::new(p, p as u32);
    let columns: Vec<Vec<_>> = basis
        .monomials()
        .iter()
        .map(|m| {
            let f = MultiPoly::monomial(ring, vars.clone(), m.clone(), ring.one());
            basis.coordinates(&orbit_sum(&action, &f)?)
        })
        .collect::<Result<_, SymError>>()?;
    let tr = Matrix::from_columns(ring, basis.len(), &columns);
    let x = tr.solve(&basis.coordinates(&target)?).ok_or(SymError::NoWitness(p))?;
    let psi = basis.polynomial(ring, &x);
    if orbit_sum(&action, &psi)? != target {
        return Err(SymError::NoWitness(p));
    }
    Ok(TrNmWitness { p, transfer_of_e1p, quotient, norm, psi })
}
