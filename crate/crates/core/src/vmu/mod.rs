//! Span classes of `v1` under a cyclic action, and the rank statements about
//! them for the tmf(2) model and the height `p - 1` E-theory model.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpmod::{standard_module, ModuleKind};
use crate::linalg::{FpMatrix, Matrix};
use crate::ring::{CoeffRing, Monomial, MultiPoly, PLocal, ResidueRing, RingAction, RingError, VarSet};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VmuError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("check failed: {detail}")]
    CheckFailed { detail: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A graded ring with an order-`p` action, a class `v1` in degree `2p - 2`
/// fixed modulo `p`, and a basis of that degree.
#[derive(Debug, Clone)]
pub struct OrientedRingModel<R: CoeffRing> {
    name: String,
    action: RingAction<R>,
    v1: MultiPoly<R>,
    basis: Vec<MultiPoly<R>>,
}

impl<R: CoeffRing> OrientedRingModel<R> {
    pub fn new(
        name: &str,
        action: RingAction<R>,
        v1: MultiPoly<R>,
        basis: Vec<MultiPoly<R>>,
    ) -> Result<Self, VmuError> {
        let p = v1.ring().prime();
        if action.order() != p {
            return Err(VmuError::InvalidModel(format!("action has order {}, expected {p}", action.order())));
        }
        let deg = 2 * p as i64 - 2;
        let v1 = v1.embed(action.vars())?;
        if !v1.is_homogeneous_of_degree(deg) {
            return Err(VmuError::InvalidModel(format!("v1 = {v1} is not homogeneous of degree {deg}")));
        }
        let basis = basis.iter().map(|b| b.embed(action.vars())).collect::<Result<Vec<_>, _>>()?;
        if let Some(b) = basis.iter().find(|b| !b.is_homogeneous_of_degree(deg)) {
            return Err(VmuError::InvalidModel(format!("basis element {b} is not of degree {deg}")));
        }
        let moved = v1.sub(&action.apply(&v1, 1)?);
        if moved.divide_by_p().is_err() {
            return Err(RingError::NotDivisible { term: format!("v1 - γ v1 = {moved}"), prime: p }.into());
        }
        let model = OrientedRingModel { name: name.to_string(), action, v1, basis };
        if model.basis_matrix().rank() != model.basis.len() {
            return Err(VmuError::InvalidModel("basis is linearly dependent mod p".into()));
        }
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn prime(&self) -> u64 {
        self.v1.ring().prime()
    }

    pub fn action(&self) -> &RingAction<R> {
        &self.action
    }

    pub fn v1(&self) -> &MultiPoly<R> {
        &self.v1
    }

    pub fn basis(&self) -> &[MultiPoly<R>] {
        &self.basis
    }

    /// The same model with `v1` replaced.
    pub fn with_v1(&self, v1: MultiPoly<R>) -> Result<Self, VmuError> {
        Self::new(&self.name, self.action.clone(), v1, self.basis.clone())
    }

    fn monomial_index(&self) -> BTreeMap<Monomial, usize> {
        let mut idx = BTreeMap::new();
        for b in &self.basis {
            for (m, _) in b.terms() {
                let n = idx.len();
                idx.entry(m.clone()).or_insert(n);
            }
        }
        idx
    }

    fn basis_matrix(&self) -> FpMatrix {
        let idx = self.monomial_index();
        let cols: Vec<Vec<u64>> = self.basis.iter().map(|b| monomial_vector(&idx, &b.reduce_mod_p()).unwrap()).collect();
        fp_columns(self.prime(), idx.len(), &cols)
    }

    /// Coordinates of `f` mod `p` in the basis.
    pub fn coordinates(&self, f: &MultiPoly<R>) -> Result<Vec<u64>, VmuError> {
        let fp = ResidueRing::prime_field(self.prime());
        let idx = self.monomial_index();
        let outside = || VmuError::CheckFailed { detail: format!("{f} is not in the span of the basis mod p") };
        let b = monomial_vector(&idx, &f.reduce_mod_p()).ok_or_else(outside)?;
        let cols: Vec<Vec<u64>> = self.basis.iter().map(|g| monomial_vector(&idx, &g.reduce_mod_p()).unwrap()).collect();
        let m = Matrix::from_columns(fp, idx.len(), &cols);
        m.solve(&b).ok_or_else(outside)
    }
}

fn monomial_vector(idx: &BTreeMap<Monomial, usize>, f: &MultiPoly<ResidueRing>) -> Option<Vec<u64>> {
    let mut v = vec![0; idx.len()];
    for (m, c) in f.terms() {
        v[*idx.get(m)?] = *c;
    }
    Some(v)
}

fn fp_columns(p: u64, rows: usize, cols: &[Vec<u64>]) -> FpMatrix {
    let mut m = FpMatrix::zeros(p as u32, rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            m.set(i, j, x as u32);
        }
    }
    m
}

fn tmf2_vars() -> Arc<VarSet> {
    VarSet::weighted(&[("l1", 4), ("l2", 4)])
}

/// `Z_(3)[l1, l2]` with `γ: l1 -> l2 - l1, l2 -> -l1` and `v1 = -l1 - l2`.
pub fn tmf2_model() -> OrientedRingModel<PLocal> {
    let r = PLocal::new(3);
    let vars = tmf2_vars();
    let p = |s: &str| MultiPoly::parse(r, vars.clone(), s).expect("fixed polynomial");
    let action = RingAction::new(vec![p("l2 - l1"), p("-l1")], 3).expect("tmf(2) action has order 3");
    OrientedRingModel::new("tmf2", action, p("-l1 - l2"), vec![p("l1"), p("l2")]).expect("tmf(2) model")
}

/// The tmf(2) coefficients with the trivial action.
pub fn trivial_model() -> OrientedRingModel<PLocal> {
    let r = PLocal::new(3);
    let vars = tmf2_vars();
    let p = |s: &str| MultiPoly::parse(r, vars.clone(), s).expect("fixed polynomial");
    let action = RingAction::new(vec![p("l1"), p("l2")], 3).expect("identity action");
    OrientedRingModel::new("trivial", action, p("-l1 - l2"), vec![p("l1"), p("l2")]).expect("trivial model")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanClasses<R: CoeffRing> {
    pub classes: Vec<MultiPoly<R>>,
    /// The defining formula of each class, e.g. `(v1 - γ^2 v1)/3`.
    pub formulas: Vec<String>,
}

fn gamma_label(k: u64) -> String {
    match k {
        0 => "v1".into(),
        1 => "γ v1".into(),
        _ => format!("γ^{k} v1"),
    }
}

/// `c1 = (v1 - γ^{p-1} v1)/p` and `ci = (γ^{i-1} v1 - γ^{i-2} v1)/p` for
/// `2 <= i <= p - 1`.
pub fn span_classes<R: CoeffRing>(m: &OrientedRingModel<R>) -> Result<SpanClasses<R>, VmuError> {
    span_classes_of(m, m.v1())
}

fn span_classes_of<R: CoeffRing>(m: &OrientedRingModel<R>, v1: &MultiPoly<R>) -> Result<SpanClasses<R>, VmuError> {
    let p = m.prime();
    let orbit: Vec<MultiPoly<R>> = (0..p as i64).map(|k| m.action.apply(v1, k)).collect::<Result<_, _>>()?;
    let mut pairs = vec![(0, p - 1)];
    pairs.extend((2..p).map(|i| (i - 1, i - 2)));
    let mut classes = Vec::new();
    let mut formulas = Vec::new();
    for (a, b) in pairs {
        classes.push(orbit[a as usize].sub(&orbit[b as usize]).divide_by_p()?);
        formulas.push(format!("({} - {})/{p}", gamma_label(a), gamma_label(b)));
    }
    Ok(SpanClasses { classes, formulas })
}

/// Columns are the coordinates of the classes, reduced mod `p`.
pub fn span_matrix<R: CoeffRing>(m: &OrientedRingModel<R>, s: &SpanClasses<R>) -> Result<FpMatrix, VmuError> {
    let cols: Vec<Vec<u64>> = s.classes.iter().map(|c| m.coordinates(c)).collect::<Result<_, _>>()?;
    Ok(fp_columns(m.prime(), m.basis.len(), &cols))
}

pub fn span_rank<R: CoeffRing>(m: &OrientedRingModel<R>) -> Result<usize, VmuError> {
    Ok(span_matrix(m, &span_classes(m)?)?.rank())
}

/// Determinant over `F_p` of a square matrix, by elimination.
pub fn det_mod_p(a: &FpMatrix) -> u64 {
    assert_eq!(a.rows(), a.cols());
    let p = a.prime() as u64;
    let n = a.rows();
    let mut m: Vec<Vec<u64>> = (0..n).map(|i| a.row(i).iter().map(|&x| x as u64).collect()).collect();
    let mut det = 1u64;
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| m[r][c] != 0) else { return 0 };
        if r != c {
            m.swap(r, c);
            det = (p - det) % p;
        }
        det = det * m[c][c] % p;
        let inv = (1..p).find(|x| x * m[c][c] % p == 1).expect("prime modulus");
        for r in c + 1..n {
            let f = m[r][c] * inv % p;
            for k in c..n {
                m[r][k] = (m[r][k] + (p - f) * m[c][k]) % p;
            }
        }
    }
    det
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanReport {
    pub model: String,
    pub p: u64,
    pub v1: String,
    pub classes: Vec<LabelledClass>,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_mod_p: Option<u64>,
    /// The convention `v = (γ v1 - v1)/p` used for the single class in the
    /// tmf(2) calculation, recorded beside the theorem's ordering.
    pub gamma_minus_one_class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledClass {
    pub formula: String,
    pub value: String,
}

pub fn span_report<R: CoeffRing>(m: &OrientedRingModel<R>) -> Result<SpanReport, VmuError> {
    let s = span_classes(m)?;
    let mat = span_matrix(m, &s)?;
    let orbit1 = m.action.apply(m.v1(), 1)?;
    let v = orbit1.sub(m.v1()).divide_by_p()?;
    Ok(SpanReport {
        model: m.name.clone(),
        p: m.prime(),
        v1: m.v1.to_string(),
        classes: s
            .formulas
            .iter()
            .zip(&s.classes)
            .map(|(f, c)| LabelledClass { formula: f.clone(), value: c.to_string() })
            .collect(),
        rank: mat.rank(),
        det_mod_p: (mat.rows() == mat.cols()).then(|| det_mod_p(&mat)),
        gamma_minus_one_class: v.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TelescopeReport {
    pub sum_of_classes: String,
    pub closing_difference: String,
    /// `c1 + ... + c_{p-1} = (γ^{p-2} v1 - γ^{p-1} v1)/p`.
    pub partial_sum_identity: bool,
    /// The sum of all `p` consecutive differences around the orbit is zero.
    pub full_orbit_sum_zero: bool,
}

pub fn telescoping_check<R: CoeffRing>(m: &OrientedRingModel<R>) -> Result<TelescopeReport, VmuError> {
    let p = m.prime() as i64;
    let s = span_classes(m)?;
    let ring = m.v1.ring().clone();
    let mut sum = MultiPoly::zero(ring.clone(), m.action.vars().clone());
    for c in &s.classes {
        sum.add_assign(c);
    }
    let g = |k: i64| m.action.apply(&m.v1, k);
    let closing = g(p - 2)?.sub(&g(p - 1)?).divide_by_p()?;
    let mut full = MultiPoly::zero(ring, m.action.vars().clone());
    for k in 0..p {
        full.add_assign(&g(k)?.sub(&g(k - 1)?).divide_by_p()?);
    }
    Ok(TelescopeReport {
        sum_of_classes: sum.to_string(),
        closing_difference: closing.to_string(),
        partial_sum_identity: sum == closing,
        full_orbit_sum_zero: full.is_zero(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub x: String,
    pub differences: Vec<String>,
    pub identity_holds: bool,
    pub rank_before: usize,
    pub rank_after: usize,
}

/// Replaces `v1` by `v1 + p x` and checks that the classes move by
/// `(x - γ^{p-1} x, γ x - x, ..., γ^{p-2} x - γ^{p-3} x)` without changing
/// the rank.
pub fn transfer_perturbation_check<R: CoeffRing>(
    m: &OrientedRingModel<R>,
    x: &MultiPoly<R>,
) -> Result<PerturbationReport, VmuError> {
    let p = m.prime();
    let x = x.embed(m.action.vars())?;
    let deg = 2 * p as i64 - 2;
    if !x.is_zero() && !x.is_homogeneous_of_degree(deg) {
        return Err(VmuError::InvalidModel(format!("x = {x} is not homogeneous of degree {deg}")));
    }
    let moved = m.with_v1(m.v1.add(&x.scale_i64(p as i64)))?;
    let before = span_classes(m)?;
    let after = span_classes(&moved)?;
    let gx: Vec<MultiPoly<R>> = (0..p as i64).map(|k| m.action.apply(&x, k)).collect::<Result<_, _>>()?;
    let mut expected = vec![gx[0].sub(&gx[p as usize - 1])];
    expected.extend((2..p as usize).map(|i| gx[i - 1].sub(&gx[i - 2])));
    let mut differences = Vec::new();
    for (i, ((a, b), e)) in after.classes.iter().zip(&before.classes).zip(&expected).enumerate() {
        let d = a.sub(b);
        if d != *e {
            return Err(VmuError::CheckFailed {
                detail: format!("class c{} moved by {d}, expected {e}", i + 1),
            });
        }
        differences.push(d.to_string());
    }
    let rank_before = span_matrix(m, &before)?.rank();
    let rank_after = span_matrix(m, &after)?.rank();
    if rank_before != rank_after {
        return Err(VmuError::CheckFailed {
            detail: format!("rank changed from {rank_before} to {rank_after} for x = {x}"),
        });
    }
    Ok(PerturbationReport { x: x.to_string(), differences, identity_holds: true, rank_before, rank_after })
}

/// A random element of the basis span with coefficients in `[-bound, bound]`.
pub fn random_basis_element<R: CoeffRing>(m: &OrientedRingModel<R>, rng: &mut impl Rng, bound: i64) -> MultiPoly<R> {
    let ring = m.v1.ring().clone();
    let mut x = MultiPoly::zero(ring, m.action.vars().clone());
    for b in &m.basis {
        x.add_assign(&b.scale_i64(rng.gen_range(-bound..=bound)));
    }
    x
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationSuiteReport {
    pub model: String,
    pub p: u64,
    pub random_samples: usize,
    pub linear_samples: usize,
    pub seed: u64,
    pub rank: usize,
}

/// [`transfer_perturbation_check`] on `samples` seeded random elements of
/// the basis span, then on every combination of the basis with
/// coefficients in `0..p`.
pub fn transfer_perturbation_suite<R: CoeffRing>(
    m: &OrientedRingModel<R>,
    samples: usize,
    seed: u64,
) -> Result<PerturbationSuiteReport, VmuError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rank = span_rank(m)?;
    for _ in 0..samples {
        let x = random_basis_element(m, &mut rng, 27);
        rank = transfer_perturbation_check(m, &x)?.rank_after;
    }
    let p = m.prime() as usize;
    let n = m.basis.len() as u32;
    let ring = m.v1.ring().clone();
    let combos = p.pow(n);
    for index in 0..combos {
        let mut x = MultiPoly::zero(ring.clone(), m.action.vars().clone());
        let mut rest = index;
        for b in &m.basis {
            x.add_assign(&b.scale_i64((rest % p) as i64));
            rest /= p;
        }
        transfer_perturbation_check(m, &x)?;
    }
    Ok(PerturbationSuiteReport {
        model: m.name.clone(),
        p: m.prime(),
        random_samples: samples,
        linear_samples: combos,
        seed,
        rank,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ETheoryReport {
    pub p: u64,
    pub classes: Vec<String>,
    pub rank: usize,
    pub perturbation_mode: String,
    pub perturbations: usize,
    pub min_rank_after_perturbation: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// The degree `2p - 2` part of the E-theory model as `ρ̄` over `F_p`, with
/// the span classes `γ^{p-1} v, v, γ v, ..., γ^{p-3} v` of the generator
/// `v = e1`. The rank is rechecked after applying `1 + Tr(ψ)` for all
/// transferred `Tr(ψ)` when `p = 3`, and for `samples` random `ψ` otherwise.
pub fn e_theory_span_check(p: u64, samples: usize, seed: u64) -> Result<ETheoryReport, VmuError> {
    if ![2, 3, 5, 7].contains(&p) {
        return Err(VmuError::Unsupported(format!("E-theory model needs p in {{2,3,5,7}}, got {p}")));
    }
    let pp = p as u32;
    let gamma = standard_module(ModuleKind::Rhobar, ResidueRing::prime_field(p)).gamma().to_fp();
    let n = gamma.rows();
    let mut v = vec![0u32; n];
    v[0] = 1;
    let powers: Vec<FpMatrix> = (0..p).map(|k| gamma.pow(k)).collect();
    let exps: Vec<u64> = if p == 2 { vec![0] } else { std::iter::once(p - 1).chain(0..p - 2).collect() };
    let class_matrix = |phi: &FpMatrix| {
        let cols: Vec<Vec<u64>> =
            exps.iter().map(|&k| powers[k as usize].mul(phi).mul_vec(&v).iter().map(|&x| x as u64).collect()).collect();
        fp_columns(p, n, &cols)
    };
    let id = FpMatrix::identity(pp, n);
    let base = class_matrix(&id);
    let rank = base.rank();
    if rank != n {
        return Err(VmuError::CheckFailed { detail: format!("span classes have rank {rank}, expected {n}") });
    }

    let transfer = |psi: &FpMatrix| {
        let mut acc = FpMatrix::zeros(pp, n, n);
        for k in 0..p as usize {
            acc = acc.add(&powers[k].mul(psi).mul(&powers[(p as usize - k) % p as usize]));
        }
        acc
    };
    let (mode, taus, seed_used) = if p <= 3 {
        // Enumerate the span of all Tr(E_ij).
        let mut span: Vec<FpMatrix> = Vec::new();
        let mut ech = crate::linalg::Echelon::new(pp, n * n);
        for k in 0..n * n {
            let mut e = FpMatrix::zeros(pp, n, n);
            e.set(k / n, k % n, 1);
            let t = transfer(&e);
            if ech.insert(t.entries().to_vec()) {
                span.push(t);
            }
        }
        let mut all = vec![FpMatrix::zeros(pp, n, n)];
        for b in &span {
            all = all.iter().flat_map(|a| (0..pp).map(move |c| a.add(&b.scale(c)))).collect();
        }
        ("exhaustive", all, None)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let taus = (0..samples)
            .map(|_| {
                let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..p as i64)).collect()).collect();
                transfer(&FpMatrix::from_rows(pp, &rows))
            })
            .collect();
        ("sampled", taus, Some(seed))
    };
    let mut min_rank = rank;
    for tau in &taus {
        if !tau.mul(&gamma).sub(&gamma.mul(tau)).is_zero() {
            return Err(VmuError::CheckFailed { detail: "a transferred endomorphism is not equivariant".into() });
        }
        let r = class_matrix(&id.add(tau)).rank();
        min_rank = min_rank.min(r);
        if r != rank {
            return Err(VmuError::CheckFailed { detail: format!("rank dropped to {r} after a transferred perturbation") });
        }
    }
    let classes = exps
        .iter()
        .map(|&k| match k {
            0 => "v".to_string(),
            1 => "γ v".to_string(),
            _ => format!("γ^{k} v"),
        })
        .collect();
    Ok(ETheoryReport {
        p,
        classes,
        rank,
        perturbation_mode: mode.into(),
        perturbations: taus.len(),
        min_rank_after_perturbation: min_rank,
        seed: seed_used,
    })
}
