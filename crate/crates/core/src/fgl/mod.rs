//! Formal group laws of Weierstrass curves and their `n`-series.
//!
//! The group law is built from the curve in the coordinates `z = -x/y`,
//! `w = -1/y`: the line through two formal points meets the curve in a third
//! point, and the sum is the formal inverse of that point. Only ring
//! operations and the inversion of series with unit constant term are used,
//! so the construction stays inside `Z_(p)[a_i]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{series_solve, CoeffRing, Monomial, MultiPoly, RingError, TruncSeries, VarSet};

mod invariants;

pub use invariants::{
    extract_v1, extract_v2, extract_v2_eliminating, multivar_sum_coeff_check, n_series, reduce_mod_ideal, MultivarReport,
    OrbitContribution, V2Method, V2Result,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FglError {
    #[error("formal group law axiom `{axiom}` fails below degree {trunc}: {detail}")]
    AxiomViolation { axiom: String, trunc: u32, detail: String },
    #[error("truncation {got} too small: need at least {needed}")]
    TruncationTooSmall { needed: u32, got: u32 },
    #[error("{0} is not homogeneous, so the graded reduction does not apply")]
    NotHomogeneous(String),
    #[error("check failed: {detail}")]
    CheckFailed { detail: String },
    #[error("cannot read curve: {0}")]
    CurveSpec(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassCurve<R: CoeffRing> {
    pub a1: MultiPoly<R>,
    pub a2: MultiPoly<R>,
    pub a3: MultiPoly<R>,
    pub a4: MultiPoly<R>,
    pub a6: MultiPoly<R>,
}

/// Textual curve description, e.g. `{"vars": ["l1","l2"], "a2": "-l1 - l2", "a4": "l1*l2"}`.
/// Missing coefficients are zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    #[serde(default)]
    pub vars: Vec<String>,
    #[serde(default)]
    pub weights: Option<Vec<i32>>,
    pub a1: Option<String>,
    pub a2: Option<String>,
    pub a3: Option<String>,
    pub a4: Option<String>,
    pub a6: Option<String>,
}

impl<R: CoeffRing> WeierstrassCurve<R> {
    pub fn new(a: [MultiPoly<R>; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = a;
        WeierstrassCurve { a1, a2, a3, a4, a6 }
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        self.a1.vars()
    }

    pub fn ring(&self) -> &R {
        self.a1.ring()
    }

    /// `y^2 = x (x - l1)(x - l2)` over `R[l1, l2]`, the variables carrying
    /// weight `2p - 2`.
    pub fn tmf2(ring: R) -> Self {
        let w = (2 * ring.prime() - 2) as i32;
        let vars = VarSet::weighted(&[("l1", w), ("l2", w)]);
        let l1 = MultiPoly::var_index(ring.clone(), vars.clone(), 0);
        let l2 = MultiPoly::var_index(ring.clone(), vars.clone(), 1);
        let zero = MultiPoly::zero(ring, vars);
        WeierstrassCurve::new([zero.clone(), l1.add(&l2).neg(), zero.clone(), l1.mul(&l2), zero])
    }

    pub fn from_spec(ring: R, spec: &CurveSpec) -> Result<Self, FglError> {
        let names: Vec<&str> = spec.vars.iter().map(String::as_str).collect();
        let vars = match &spec.weights {
            Some(w) if w.len() == names.len() => {
                let pairs: Vec<(&str, i32)> = names.iter().copied().zip(w.iter().copied()).collect();
                VarSet::weighted(&pairs)
            }
            Some(_) => return Err(FglError::CurveSpec("one weight per variable required".into())),
            None => VarSet::new(&names),
        };
        let parse = |s: &Option<String>| -> Result<MultiPoly<R>, FglError> {
            match s {
                None => Ok(MultiPoly::zero(ring.clone(), vars.clone())),
                Some(t) => Ok(MultiPoly::parse(ring.clone(), vars.clone(), t)?),
            }
        };
        Ok(WeierstrassCurve::new([
            parse(&spec.a1)?,
            parse(&spec.a2)?,
            parse(&spec.a3)?,
            parse(&spec.a4)?,
            parse(&spec.a6)?,
        ]))
    }

    pub fn from_json(ring: R, json: &str) -> Result<Self, FglError> {
        let spec: CurveSpec = serde_json::from_str(json).map_err(|e| FglError::CurveSpec(e.to_string()))?;
        Self::from_spec(ring, &spec)
    }

    /// The series `w(z) = z^3 + ...` cutting out the curve near the origin,
    /// with coefficients through `z^{trunc-1}`.
    pub fn w_series(&self, trunc: u32) -> Result<TruncSeries<R>, FglError> {
        let ring = self.ring().clone();
        let cvars = self.vars().clone();
        let coeff = |k: usize| -> Vec<MultiPoly<R>> {
            let mut v = vec![MultiPoly::zero(ring.clone(), cvars.clone()); k + 1];
            v[k] = MultiPoly::one(ring.clone(), cvars.clone());
            v
        };
        let z_pow = |k: usize| TruncSeries::univariate(ring.clone(), "z", cvars.clone(), trunc, &coeff(k));
        let z = z_pow(1);
        let z2 = z_pow(2);
        let z3 = z_pow(3);
        let a = |c: &MultiPoly<R>, s: &TruncSeries<R>| s.scale(c);
        let w = series_solve(
            z3.clone(),
            |w| {
                let w2 = w.mul(w);
                let mut rhs = z3.clone();
                rhs = rhs.add(&a(&self.a1, &z.mul(w)));
                rhs = rhs.add(&a(&self.a2, &z2.mul(w)));
                rhs = rhs.add(&a(&self.a3, &w2));
                rhs = rhs.add(&a(&self.a4, &z.mul(&w2)));
                rhs = rhs.add(&a(&self.a6, &w2.mul(w)));
                Ok(rhs)
            },
            trunc as usize + 4,
        )?;
        Ok(w)
    }
}

/// A bivariate series `F(z1, z2)` satisfying the formal group law axioms
/// below its truncation degree.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalGroupLaw<R: CoeffRing> {
    f: TruncSeries<R>,
}

fn series_vars2() -> Arc<VarSet> {
    VarSet::new(&["z1", "z2"])
}

impl<R: CoeffRing> FormalGroupLaw<R> {
    /// Validates unit, commutativity and associativity up to truncation.
    pub fn new(f: TruncSeries<R>) -> Result<Self, FglError> {
        if f.series_vars().len() != 2 {
            return Err(FglError::AxiomViolation {
                axiom: "shape".into(),
                trunc: f.trunc(),
                detail: "a group law is a series in two variables".into(),
            });
        }
        let law = FormalGroupLaw { f };
        law.check_axioms()?;
        Ok(law)
    }

    pub fn additive(ring: R, cvars: Arc<VarSet>, trunc: u32) -> Self {
        let sv = series_vars2();
        let x = TruncSeries::var(ring.clone(), sv.clone(), cvars.clone(), trunc, 0);
        let y = TruncSeries::var(ring, sv, cvars, trunc, 1);
        Self::new(x.add(&y)).expect("additive law")
    }

    /// `F(x, y) = x + y + xy`.
    pub fn multiplicative(ring: R, cvars: Arc<VarSet>, trunc: u32) -> Self {
        let sv = series_vars2();
        let x = TruncSeries::var(ring.clone(), sv.clone(), cvars.clone(), trunc, 0);
        let y = TruncSeries::var(ring, sv, cvars, trunc, 1);
        Self::new(x.add(&y).add(&x.mul(&y))).expect("multiplicative law")
    }

    pub fn series(&self) -> &TruncSeries<R> {
        &self.f
    }

    pub fn trunc(&self) -> u32 {
        self.f.trunc()
    }

    pub fn ring(&self) -> &R {
        self.f.ring()
    }

    pub fn coeff_vars(&self) -> &Arc<VarSet> {
        self.f.coeff_vars()
    }

    /// Coefficient of `z1^i z2^j`.
    pub fn coeff(&self, i: u32, j: u32) -> MultiPoly<R> {
        self.f.coeff_exps(&[i, j])
    }

    /// `F(a, b)` for series `a, b` without constant term.
    pub fn apply(&self, a: &TruncSeries<R>, b: &TruncSeries<R>) -> Result<TruncSeries<R>, FglError> {
        Ok(self.f.compose(&[a.clone(), b.clone()])?)
    }

    pub fn check_axioms(&self) -> Result<(), FglError> {
        let ring = self.ring().clone();
        let cv = self.coeff_vars().clone();
        let n = self.trunc();
        let violation = |axiom: &str, detail: String| FglError::AxiomViolation { axiom: axiom.into(), trunc: n, detail };
        let sv2 = series_vars2();
        let z1 = TruncSeries::var(ring.clone(), sv2.clone(), cv.clone(), n, 0);
        let z2 = TruncSeries::var(ring.clone(), sv2.clone(), cv.clone(), n, 1);
        let zero = TruncSeries::zero(ring.clone(), sv2.clone(), cv.clone(), n);
        let left = self.apply(&z1, &zero)?;
        if left != z1 {
            return Err(violation("F(z, 0) = z", left.to_string()));
        }
        let right = self.apply(&zero, &z2)?;
        if right != z2 {
            return Err(violation("F(0, z) = z", right.to_string()));
        }
        let swapped = self.apply(&z2, &z1)?;
        if swapped != self.f {
            return Err(violation("commutativity", swapped.sub(&self.f).to_string()));
        }
        let sv3 = VarSet::new(&["z1", "z2", "z3"]);
        let t: Vec<TruncSeries<R>> =
            (0..3).map(|i| TruncSeries::var(ring.clone(), sv3.clone(), cv.clone(), n, i)).collect();
        let f12 = self.apply(&t[0], &t[1])?;
        let f23 = self.apply(&t[1], &t[2])?;
        let lhs = self.apply(&f12, &t[2])?;
        let rhs = self.apply(&t[0], &f23)?;
        if lhs != rhs {
            return Err(violation("associativity", lhs.sub(&rhs).to_string()));
        }
        Ok(())
    }

    /// The law `phi(F(phi^{-1}(z1), phi^{-1}(z2)))` in the coordinate
    /// `phi(z)`, for `phi = z + O(z^2)` univariate.
    pub fn change_coordinates(&self, phi: &TruncSeries<R>) -> Result<Self, FglError> {
        let phi = phi.embed_coeffs(self.coeff_vars())?;
        let inv = phi.revert()?;
        let sv2 = series_vars2();
        let ring = self.ring().clone();
        let cv = self.coeff_vars().clone();
        let n = self.trunc().min(phi.trunc());
        let z1 = TruncSeries::var(ring.clone(), sv2.clone(), cv.clone(), n, 0);
        let z2 = TruncSeries::var(ring, sv2, cv, n, 1);
        let a = inv.compose(&[z1])?;
        let b = inv.compose(&[z2])?;
        let g = self.apply(&a, &b)?;
        Self::new(phi.compose(&[g])?)
    }

    /// Re-expresses the coefficients over a larger set of variables.
    pub fn embed_coeffs(&self, cvars: &Arc<VarSet>) -> Result<Self, FglError> {
        Ok(FormalGroupLaw { f: self.f.embed_coeffs(cvars)? })
    }
}

/// The formal group law of `curve`, exact below total degree `trunc`.
pub fn curve_formal_group<R: CoeffRing>(curve: &WeierstrassCurve<R>, trunc: u32) -> Result<FormalGroupLaw<R>, FglError> {
    if trunc < 4 {
        return Err(FglError::TruncationTooSmall { needed: 4, got: trunc });
    }
    let ring = curve.ring().clone();
    let cv = curve.vars().clone();
    let n = trunc;
    let w = curve.w_series(n + 2)?;
    let sv = series_vars2();
    let one = MultiPoly::one(ring.clone(), cv.clone());
    let mono = |i: u32, j: u32| {
        TruncSeries::from_terms(ring.clone(), sv.clone(), cv.clone(), n, [(Monomial::from_exponents(&[i, j]), one.clone())])
    };
    let z1 = mono(1, 0);
    let z2 = mono(0, 1);

    // Slope of the chord: sum_k w_k (z1^k - z2^k)/(z1 - z2).
    let mut lambda = TruncSeries::zero(ring.clone(), sv.clone(), cv.clone(), n);
    let mut w1 = TruncSeries::zero(ring.clone(), sv.clone(), cv.clone(), n);
    for k in 1..n + 2 {
        let wk = w.coeff_exps(&[k]);
        if wk.is_zero() {
            continue;
        }
        w1 = w1.add(&mono(k, 0).scale(&wk));
        let mut h = TruncSeries::zero(ring.clone(), sv.clone(), cv.clone(), n);
        for i in 0..k {
            h = h.add(&mono(i, k - 1 - i));
        }
        lambda = lambda.add(&h.scale(&wk));
    }
    let nu = w1.sub(&lambda.mul(&z1));

    let c = |a: &MultiPoly<R>, k: i64| a.scale_i64(k);
    let lam2 = lambda.mul(&lambda);
    let lam3 = lam2.mul(&lambda);
    // Sum of the three roots of the cubic in z cut out by w = lambda z + nu.
    let num = lambda
        .scale(&curve.a1)
        .add(&nu.scale(&curve.a2))
        .add(&lam2.scale(&curve.a3))
        .add(&lambda.mul(&nu).scale(&c(&curve.a4, 2)))
        .add(&lam2.mul(&nu).scale(&c(&curve.a6, 3)));
    let den = TruncSeries::one(ring.clone(), sv.clone(), cv.clone(), n)
        .add(&lambda.scale(&curve.a2))
        .add(&lam2.scale(&curve.a4))
        .add(&lam3.scale(&curve.a6));
    let z3 = z1.neg().sub(&z2).sub(&num.mul(&den.recip()?));
    let w3 = lambda.mul(&z3).add(&nu);

    // Formal inverse: i(z, w) = z / (-1 + a1 z + a3 w).
    let minus_one = TruncSeries::one(ring, sv, cv, n).neg();
    let inv_den = minus_one.add(&z3.scale(&curve.a1)).add(&w3.scale(&curve.a3));
    let f = z3.mul(&inv_den.recip()?);
    FormalGroupLaw::new(f)
}
