use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::poly::PolyJson;
use super::{CoeffRing, Monomial, MultiPoly, ResidueRing, RingError, VarSet};

/// A power series in the series variables with polynomial coefficients,
/// truncated in total degree: terms of degree `>= trunc` are discarded.
#[derive(Clone)]
pub struct TruncSeries<R: CoeffRing> {
    ring: R,
    svars: Arc<VarSet>,
    cvars: Arc<VarSet>,
    trunc: u32,
    terms: BTreeMap<Monomial, MultiPoly<R>>,
}

impl<R: CoeffRing> PartialEq for TruncSeries<R> {
    fn eq(&self, other: &Self) -> bool {
        self.trunc == other.trunc && self.svars == other.svars && self.cvars == other.cvars && self.terms == other.terms
    }
}

impl<R: CoeffRing> fmt::Debug for TruncSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncSeries({})", self)
    }
}

impl<R: CoeffRing> TruncSeries<R> {
    pub fn zero(ring: R, svars: Arc<VarSet>, cvars: Arc<VarSet>, trunc: u32) -> Self {
        TruncSeries { ring, svars, cvars, trunc, terms: BTreeMap::new() }
    }

    pub fn from_terms(
        ring: R,
        svars: Arc<VarSet>,
        cvars: Arc<VarSet>,
        trunc: u32,
        terms: impl IntoIterator<Item = (Monomial, MultiPoly<R>)>,
    ) -> Self {
        let mut s = Self::zero(ring, svars, cvars, trunc);
        for (m, c) in terms {
            s.add_term(m, &c);
        }
        s
    }

    pub fn constant(ring: R, svars: Arc<VarSet>, trunc: u32, c: MultiPoly<R>) -> Self {
        let cvars = c.vars().clone();
        let n = svars.len();
        Self::from_terms(ring, svars, cvars, trunc, [(Monomial::one(n), c)])
    }

    pub fn one(ring: R, svars: Arc<VarSet>, cvars: Arc<VarSet>, trunc: u32) -> Self {
        let c = MultiPoly::one(ring.clone(), cvars);
        Self::constant(ring, svars, trunc, c)
    }

    pub fn var(ring: R, svars: Arc<VarSet>, cvars: Arc<VarSet>, trunc: u32, i: usize) -> Self {
        let n = svars.len();
        let c = MultiPoly::one(ring.clone(), cvars.clone());
        Self::from_terms(ring, svars, cvars, trunc, [(Monomial::var(n, i), c)])
    }

    /// A series in one variable from its coefficients `c_0, c_1, ...`.
    pub fn univariate(ring: R, svar: &str, cvars: Arc<VarSet>, trunc: u32, coeffs: &[MultiPoly<R>]) -> Self {
        let svars = VarSet::new(&[svar]);
        let terms = coeffs.iter().enumerate().map(|(k, c)| (Monomial::from_exponents(&[k as u32]), c.clone()));
        Self::from_terms(ring, svars, cvars, trunc, terms)
    }

    fn add_term(&mut self, m: Monomial, c: &MultiPoly<R>) {
        assert_eq!(m.len(), self.svars.len(), "exponent vector length mismatch");
        if m.degree() >= self.trunc || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                e.add_assign(c);
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn series_vars(&self) -> &Arc<VarSet> {
        &self.svars
    }

    pub fn coeff_vars(&self) -> &Arc<VarSet> {
        &self.cvars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &MultiPoly<R>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> MultiPoly<R> {
        self.terms.get(m).cloned().unwrap_or_else(|| MultiPoly::zero(self.ring.clone(), self.cvars.clone()))
    }

    pub fn coeff_exps(&self, exps: &[u32]) -> MultiPoly<R> {
        self.coeff(&Monomial::from_exponents(exps))
    }

    pub fn constant_term(&self) -> MultiPoly<R> {
        self.coeff(&Monomial::one(self.svars.len()))
    }

    /// Lowest total degree present, if any.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    pub fn truncate(&self, n: u32) -> Self {
        let trunc = n.min(self.trunc);
        let terms = self.terms.iter().filter(|(m, _)| m.degree() < trunc).map(|(m, c)| (m.clone(), c.clone())).collect();
        TruncSeries { ring: self.ring.clone(), svars: self.svars.clone(), cvars: self.cvars.clone(), trunc, terms }
    }

    fn check_compatible(&self, other: &Self) {
        assert!(self.svars == other.svars, "series over different variables");
        assert!(self.cvars == other.cvars, "series with different coefficient variables");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = self.truncate(other.trunc);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect();
        TruncSeries { terms, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &MultiPoly<R>) -> Self {
        let mut out = Self::zero(self.ring.clone(), self.svars.clone(), self.cvars.clone(), self.trunc);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), &a.mul(c));
        }
        out
    }

    pub fn scale_i64(&self, c: i64) -> Self {
        self.scale(&MultiPoly::from_i64(self.ring.clone(), self.cvars.clone(), c))
    }

    /// Product truncated at the smaller of the two truncations.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::zero(self.ring.clone(), self.svars.clone(), self.cvars.clone(), trunc);
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            if d1 >= trunc {
                continue;
            }
            for (m2, c2) in &other.terms {
                if d1 + m2.degree() >= trunc {
                    continue;
                }
                out.add_term(m1.mul(m2), &c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ring.clone(), self.svars.clone(), self.cvars.clone(), self.trunc);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitutes `subs[i]` for series variable `i`. Every substitute must
    /// have zero constant term; the result lives in the substitutes'
    /// variables and is truncated at the smaller truncation.
    pub fn compose(&self, subs: &[TruncSeries<R>]) -> Result<TruncSeries<R>, RingError> {
        if subs.len() != self.svars.len() {
            return Err(RingError::Invalid(format!(
                "composition needs {} substitutes, got {}",
                self.svars.len(),
                subs.len()
            )));
        }
        let first = &subs[0];
        for g in subs {
            first.check_compatible(g);
            if g.cvars != self.cvars {
                return Err(RingError::VariableMismatch(g.cvars.names().join(","), self.cvars.names().join(",")));
            }
            if !g.constant_term().is_zero() {
                return Err(RingError::Invalid("composition requires substitutes with zero constant term".into()));
            }
        }
        let trunc = subs.iter().map(|g| g.trunc).min().unwrap().min(self.trunc);
        let subs: Vec<TruncSeries<R>> = subs.iter().map(|g| g.truncate(trunc)).collect();
        let mut powers: Vec<Vec<TruncSeries<R>>> = subs
            .iter()
            .map(|g| vec![Self::one(self.ring.clone(), g.svars.clone(), self.cvars.clone(), trunc)])
            .collect();
        let mut out = Self::zero(self.ring.clone(), first.svars.clone(), self.cvars.clone(), trunc);
        for (m, c) in &self.terms {
            if m.degree() >= trunc {
                continue;
            }
            let mut t: Option<TruncSeries<R>> = None;
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&subs[i]);
                    powers[i].push(next);
                }
                let pw = &powers[i][e as usize];
                t = Some(match t {
                    None => pw.clone(),
                    Some(t) => t.mul(pw),
                });
            }
            let t = match t {
                None => Self::constant(self.ring.clone(), first.svars.clone(), trunc, c.clone()),
                Some(t) => t.scale(c),
            };
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Multiplicative inverse; the constant term must be a unit constant.
    pub fn recip(&self) -> Result<Self, RingError> {
        let c0 = self.constant_term();
        let unit = if c0.num_terms() == 1 && c0.total_degree() == Some(0) {
            self.ring.inverse(&c0.constant_term())
        } else {
            None
        };
        let inv = unit.ok_or_else(|| RingError::NotInvertible(format!("constant term {c0}")))?;
        let inv = MultiPoly::constant(self.ring.clone(), self.cvars.clone(), inv);
        // self = c0 (1 + h); 1/self = c0^{-1} (1 - h + h^2 - ...)
        let one = Self::one(self.ring.clone(), self.svars.clone(), self.cvars.clone(), self.trunc);
        let h = self.scale(&inv).sub(&one);
        let mut acc = one.clone();
        let mut term = one;
        let neg_h = h.neg();
        for _ in 1..self.trunc.max(1) {
            term = term.mul(&neg_h);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.scale(&inv))
    }

    /// Compositional inverse of a univariate series `a_1 x + a_2 x^2 + ...`
    /// with `a_1` a unit constant.
    pub fn revert(&self) -> Result<Self, RingError> {
        if self.svars.len() != 1 {
            return Err(RingError::Invalid("reversion needs a univariate series".into()));
        }
        if !self.constant_term().is_zero() {
            return Err(RingError::NotInvertible("nonzero constant term".into()));
        }
        let a1 = self.coeff_exps(&[1]);
        let unit = if a1.num_terms() == 1 && a1.total_degree() == Some(0) {
            self.ring.inverse(&a1.constant_term())
        } else {
            None
        };
        let inv = unit.ok_or_else(|| RingError::NotInvertible(format!("linear coefficient {a1}")))?;
        let inv = MultiPoly::constant(self.ring.clone(), self.cvars.clone(), inv);
        let x = Self::var(self.ring.clone(), self.svars.clone(), self.cvars.clone(), self.trunc, 0);
        // g = x/a1 - (f(g) - a1 g)/a1, iterated; each pass fixes one more coefficient.
        let higher = self.sub(&x.scale(&a1));
        let mut g = x.scale(&inv);
        for _ in 0..self.trunc {
            let next = x.sub(&higher.compose(std::slice::from_ref(&g))?).scale(&inv);
            if next == g {
                return Ok(g);
            }
            g = next;
        }
        Err(RingError::NoConvergence(self.trunc as usize))
    }

    pub fn map_coeffs<S: CoeffRing>(&self, target: S, f: impl Fn(&MultiPoly<R>) -> MultiPoly<S>) -> TruncSeries<S> {
        let mut out = TruncSeries::zero(target, self.svars.clone(), self.cvars.clone(), self.trunc);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    pub fn reduce_mod_p(&self) -> TruncSeries<ResidueRing> {
        let fp = ResidueRing::prime_field(self.ring.prime());
        self.map_coeffs(fp, |c| c.reduce_mod_p())
    }

    /// Re-expresses the coefficients over a larger coefficient variable set.
    pub fn embed_coeffs(&self, cvars: &Arc<VarSet>) -> Result<Self, RingError> {
        let mut out = Self::zero(self.ring.clone(), self.svars.clone(), cvars.clone(), self.trunc);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &c.embed(cvars)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            series_vars: self.svars.names(),
            coeff_vars: self.cvars.names(),
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| SeriesTermJson { exp: m.exponents().to_vec(), coef: c.to_json(), text: c.to_string() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub series_vars: Vec<String>,
    pub coeff_vars: Vec<String>,
    pub trunc: u32,
    pub terms: Vec<SeriesTermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTermJson {
    pub exp: Vec<u32>,
    pub coef: PolyJson,
    pub text: String,
}

impl<R: CoeffRing> fmt::Display for TruncSeries<R> {
    /// Lowest degree first, ending with the truncation marker.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, c) in &self.terms {
            let cs = c.to_string();
            let cs = if c.num_terms() > 1 { format!("({cs})") } else { cs };
            if m.is_one() {
                write!(f, "{cs} + ")?;
            } else if cs == "1" {
                write!(f, "{} + ", m.format(&self.svars))?;
            } else {
                write!(f, "{cs}*{} + ", m.format(&self.svars))?;
            }
        }
        write!(f, "O(deg {})", self.trunc)
    }
}

/// Solves `w = phi(w)` by fixed-point iteration from `initial`. Each pass
/// must fix at least one more coefficient, so `max_iter` on the order of the
/// truncation suffices for a contracting `phi`.
pub fn series_solve<R: CoeffRing>(
    initial: TruncSeries<R>,
    phi: impl Fn(&TruncSeries<R>) -> Result<TruncSeries<R>, RingError>,
    max_iter: usize,
) -> Result<TruncSeries<R>, RingError> {
    let mut w = initial;
    for _ in 0..max_iter {
        let next = phi(&w)?;
        if next == w {
            return Ok(w);
        }
        w = next;
    }
    Err(RingError::NoConvergence(max_iter))
}
