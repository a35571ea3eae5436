use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{CoeffRing, ResidueRing, RingError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub weight: i32,
}

/// Ordered, named polynomial variables with integer grading weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSet(Vec<Variable>);

impl VarSet {
    /// Variables of weight 1.
    pub fn new(names: &[&str]) -> Arc<Self> {
        Self::weighted(&names.iter().map(|n| (*n, 1)).collect::<Vec<_>>())
    }

    pub fn weighted(vars: &[(&str, i32)]) -> Arc<Self> {
        let vars: Vec<Variable> =
            vars.iter().map(|(n, w)| Variable { name: n.to_string(), weight: *w }).collect();
        for (i, v) in vars.iter().enumerate() {
            assert!(
                !vars[..i].iter().any(|u| u.name == v.name),
                "duplicate variable name {}",
                v.name
            );
        }
        Arc::new(VarSet(vars))
    }

    /// `prefix1, ..., prefixN`, all of the given weight.
    pub fn indexed(prefix: &str, n: usize, weight: i32) -> Arc<Self> {
        let names: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
        let vars: Vec<(&str, i32)> = names.iter().map(|s| (s.as_str(), weight)).collect();
        Self::weighted(&vars)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|v| v.name.clone()).collect()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i].name
    }

    pub fn weight(&self, i: usize) -> i32 {
        self.0[i].weight
    }

    pub fn iter(&self) -> impl Iterator<Item = &Variable> {
        self.0.iter()
    }

    /// This set followed by the variables of `other` not already present.
    pub fn union(&self, other: &VarSet) -> Arc<Self> {
        let mut vars = self.0.clone();
        for v in &other.0 {
            if !vars.iter().any(|u| u.name == v.name) {
                vars.push(v.clone());
            }
        }
        Arc::new(VarSet(vars))
    }
}

/// Exponent vector. Stored inline for up to eight variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(SmallVec<[u32; 8]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn weighted_degree(&self, vars: &VarSet) -> i64 {
        self.0.iter().enumerate().map(|(i, &e)| e as i64 * vars.weight(i) as i64).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.len(), other.len());
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !other.divides(self) {
            return None;
        }
        Some(Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect()))
    }

    /// Cyclic shift of the exponents: position `i` moves to `i + 1`.
    pub fn rotate(&self) -> Monomial {
        let mut v = self.0.clone();
        v.rotate_right(1);
        Monomial(v)
    }

    pub fn format(&self, vars: &VarSet) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { vars.name(i).to_string() } else { format!("{}^{}", vars.name(i), e) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then the exponent of the
    /// earliest variable.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors of total degree `d` in `n` variables, in graded-lex
/// order (largest first exponent first).
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left;
            out.push(Monomial::from_exponents(cur));
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
    }
    if n == 0 {
        if d == 0 {
            out.push(Monomial::one(0));
        }
        return out;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// A multivariate polynomial over a coefficient ring. Terms are kept in
/// graded-lex order with no zero coefficients.
#[derive(Clone)]
pub struct MultiPoly<R: CoeffRing> {
    ring: R,
    vars: Arc<VarSet>,
    terms: BTreeMap<Monomial, R::Elem>,
}

impl<R: CoeffRing> PartialEq for MultiPoly<R> {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.vars == other.vars && self.terms == other.terms
    }
}

impl<R: CoeffRing> fmt::Debug for MultiPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.ring.name(), self)
    }
}

impl<R: CoeffRing> MultiPoly<R> {
    pub fn zero(ring: R, vars: Arc<VarSet>) -> Self {
        MultiPoly { ring, vars, terms: BTreeMap::new() }
    }

    pub fn constant(ring: R, vars: Arc<VarSet>, c: R::Elem) -> Self {
        let n = vars.len();
        Self::from_terms(ring, vars, [(Monomial::one(n), c)])
    }

    pub fn from_i64(ring: R, vars: Arc<VarSet>, c: i64) -> Self {
        let c = ring.from_i64(c);
        Self::constant(ring, vars, c)
    }

    pub fn one(ring: R, vars: Arc<VarSet>) -> Self {
        let c = ring.one();
        Self::constant(ring, vars, c)
    }

    pub fn var(ring: R, vars: Arc<VarSet>, name: &str) -> Result<Self, RingError> {
        let i = vars.index_of(name).ok_or_else(|| RingError::UnknownVariable(name.to_string()))?;
        Ok(Self::var_index(ring, vars, i))
    }

    pub fn var_index(ring: R, vars: Arc<VarSet>, i: usize) -> Self {
        let n = vars.len();
        let c = ring.one();
        Self::from_terms(ring, vars, [(Monomial::var(n, i), c)])
    }

    pub fn monomial(ring: R, vars: Arc<VarSet>, m: Monomial, c: R::Elem) -> Self {
        Self::from_terms(ring, vars, [(m, c)])
    }

    /// Builds a polynomial, merging repeated monomials and dropping zeros.
    pub fn from_terms(ring: R, vars: Arc<VarSet>, terms: impl IntoIterator<Item = (Monomial, R::Elem)>) -> Self {
        let mut map: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.len(), vars.len(), "exponent vector length mismatch");
            match map.get_mut(&m) {
                Some(e) => ring.add_assign(e, &c),
                None => {
                    map.insert(m, c);
                }
            }
        }
        map.retain(|_, c| !ring.is_zero(c));
        MultiPoly { ring, vars, terms: map }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &R::Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn constant_term(&self) -> R::Elem {
        self.coeff(&Monomial::one(self.vars.len()))
    }

    /// Coefficient of the monomial written as e.g. `"l1^2*l2"`.
    pub fn coeff_of(&self, monomial: &str) -> Result<R::Elem, RingError> {
        let m = parse_monomial(&self.vars, monomial)?;
        Ok(self.coeff(&m))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Weighted degree when every term has the same weighted degree.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut degs = self.terms.keys().map(|m| m.weighted_degree(&self.vars));
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    pub fn is_homogeneous_of_degree(&self, d: i64) -> bool {
        self.terms.keys().all(|m| m.weighted_degree(&self.vars) == d)
    }

    fn check_compatible(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "polynomials over different variables: {:?} vs {:?}",
            self.vars.names(),
            other.vars.names()
        );
        assert_eq!(self.ring, other.ring, "polynomials over different rings");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(e) => {
                    self.ring.add_assign(e, c);
                    if self.ring.is_zero(e) {
                        terms.remove(m);
                    }
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        MultiPoly { ring: self.ring.clone(), vars: self.vars.clone(), terms }
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.check_compatible(other);
        for (m, c) in &other.terms {
            match self.terms.get_mut(m) {
                Some(e) => {
                    self.ring.add_assign(e, c);
                    if self.ring.is_zero(e) {
                        self.terms.remove(m);
                    }
                }
                None => {
                    self.terms.insert(m.clone(), c.clone());
                }
            }
        }
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), self.ring.neg(c))).collect();
        MultiPoly { ring: self.ring.clone(), vars: self.vars.clone(), terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let terms = self.terms.iter().map(|(m, a)| (m.clone(), self.ring.mul(a, c)));
        Self::from_terms(self.ring.clone(), self.vars.clone(), terms)
    }

    pub fn scale_i64(&self, c: i64) -> Self {
        self.scale(&self.ring.from_i64(c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut terms: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let c = self.ring.mul(c1, c2);
                match terms.get_mut(&m) {
                    Some(e) => self.ring.add_assign(e, &c),
                    None => {
                        terms.insert(m, c);
                    }
                }
            }
        }
        terms.retain(|_, c| !self.ring.is_zero(c));
        MultiPoly { ring: self.ring.clone(), vars: self.vars.clone(), terms }
    }

    /// Multiplies by a monomial times a coefficient.
    pub fn mul_term(&self, m: &Monomial, c: &R::Elem) -> Self {
        let terms = self.terms.iter().map(|(m1, c1)| (m1.mul(m), self.ring.mul(c1, c)));
        Self::from_terms(self.ring.clone(), self.vars.clone(), terms)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ring.clone(), self.vars.clone());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Applies a coefficient map into another ring, keeping the variables.
    pub fn map_coeffs<S: CoeffRing>(&self, target: S, f: impl Fn(&R::Elem) -> S::Elem) -> MultiPoly<S> {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), f(c)));
        MultiPoly::from_terms(target, self.vars.clone(), terms)
    }

    /// Reduction of the coefficients into `F_p`.
    pub fn reduce_mod_p(&self) -> MultiPoly<ResidueRing> {
        let fp = ResidueRing::prime_field(self.ring.prime());
        self.map_coeffs(fp, |c| self.ring.residue(c))
    }

    /// The polynomial `g` with `p * g = self`.
    pub fn divide_by_p(&self) -> Result<Self, RingError> {
        let p = self.ring.from_i64(self.ring.prime() as i64);
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let q = match self.ring.valuation(c) {
                Some(v) if v >= 1 => self.ring.exact_div(c, &p),
                _ => None,
            };
            let q = q.ok_or_else(|| RingError::NotDivisible {
                term: format_term(&self.ring, &self.vars, m, c),
                prime: self.ring.prime(),
            })?;
            terms.insert(m.clone(), q);
        }
        Ok(Self::from_terms(self.ring.clone(), self.vars.clone(), terms))
    }

    /// Simultaneous substitution of `images[i]` for variable `i`. The images
    /// may live in a different variable set (all the same one).
    pub fn substitute(&self, images: &[MultiPoly<R>]) -> MultiPoly<R> {
        assert_eq!(images.len(), self.vars.len(), "one image per variable required");
        let target_vars = match images.first() {
            Some(g) => g.vars.clone(),
            None => self.vars.clone(),
        };
        let mut powers: Vec<Vec<MultiPoly<R>>> = images
            .iter()
            .map(|_| vec![MultiPoly::one(self.ring.clone(), target_vars.clone())])
            .collect();
        let mut out = MultiPoly::zero(self.ring.clone(), target_vars.clone());
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(self.ring.clone(), target_vars.clone(), c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize]);
            }
            out.add_assign(&t);
        }
        out
    }

    /// Re-expresses the polynomial over a larger variable set containing all
    /// of its variables by name.
    pub fn embed(&self, vars: &Arc<VarSet>) -> Result<Self, RingError> {
        if self.vars == *vars {
            return Ok(MultiPoly { ring: self.ring.clone(), vars: vars.clone(), terms: self.terms.clone() });
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.index_of(&v.name).ok_or_else(|| RingError::UnknownVariable(v.name.clone())))
            .collect::<Result<_, _>>()?;
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0u32; vars.len()];
            for (i, &k) in m.exponents().iter().enumerate() {
                e[map[i]] = k;
            }
            (Monomial::from_exponents(&e), c.clone())
        });
        Ok(Self::from_terms(self.ring.clone(), vars.clone(), terms))
    }

    /// Parses the canonical text form, e.g. `"8*l1 + 8*l2"` or `"-3/2*x^2*y + 1"`.
    pub fn parse(ring: R, vars: Arc<VarSet>, s: &str) -> Result<Self, RingError> {
        let mut terms = Vec::new();
        for (neg, body) in split_terms(s)? {
            let mut coeff = ring.one();
            let mut exps = vec![0u32; vars.len()];
            for factor in body.split('*') {
                let factor = factor.trim();
                if factor.is_empty() {
                    return Err(parse_error(s, "empty factor"));
                }
                if factor.starts_with(|c: char| c.is_ascii_digit()) {
                    coeff = ring.mul(&coeff, &ring.parse_elem(factor)?);
                } else {
                    let (name, e) = match factor.split_once('^') {
                        Some((n, e)) => {
                            (n.trim(), e.trim().parse::<u32>().map_err(|_| parse_error(s, "bad exponent"))?)
                        }
                        None => (factor, 1),
                    };
                    let i = vars.index_of(name).ok_or_else(|| RingError::UnknownVariable(name.to_string()))?;
                    exps[i] += e;
                }
            }
            if neg {
                coeff = ring.neg(&coeff);
            }
            terms.push((Monomial::from_exponents(&exps), coeff));
        }
        Ok(Self::from_terms(ring, vars, terms))
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: self.vars.names(),
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(m, c)| TermJson { exp: m.exponents().to_vec(), coef: self.ring.format_elem(c) })
                .collect(),
        }
    }

    pub fn from_json(ring: R, vars: Arc<VarSet>, json: &PolyJson) -> Result<Self, RingError> {
        if json.vars != vars.names() {
            return Err(RingError::VariableMismatch(json.vars.join(","), vars.names().join(",")));
        }
        let terms = json
            .terms
            .iter()
            .map(|t| {
                if t.exp.len() != vars.len() {
                    return Err(RingError::Invalid("exponent vector length".into()));
                }
                Ok((Monomial::from_exponents(&t.exp), ring.parse_elem(&t.coef)?))
            })
            .collect::<Result<Vec<_>, RingError>>()?;
        Ok(Self::from_terms(ring, vars, terms))
    }
}

/// JSON form of a polynomial: `{"vars":[…],"terms":[{"exp":[…],"coef":"…"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: String,
}

fn parse_error(input: &str, reason: &str) -> RingError {
    RingError::Parse { input: input.to_string(), reason: reason.to_string() }
}

fn parse_monomial(vars: &VarSet, s: &str) -> Result<Monomial, RingError> {
    let mut exps = vec![0u32; vars.len()];
    if s.trim() == "1" {
        return Ok(Monomial::from_exponents(&exps));
    }
    for factor in s.split('*') {
        let (name, e) = match factor.split_once('^') {
            Some((n, e)) => (n.trim(), e.trim().parse::<u32>().map_err(|_| parse_error(s, "bad exponent"))?),
            None => (factor.trim(), 1),
        };
        let i = vars.index_of(name).ok_or_else(|| RingError::UnknownVariable(name.to_string()))?;
        exps[i] += e;
    }
    Ok(Monomial::from_exponents(&exps))
}

/// Splits at top-level `+`/`-` signs. A `-` directly after `/` or `^` is not a
/// separator.
fn split_terms(s: &str) -> Result<Vec<(bool, String)>, RingError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut seen_any = false;
    for ch in s.chars() {
        match ch {
            '+' | '-' => {
                let prev = cur.trim_end().chars().last();
                if matches!(prev, Some('/') | Some('^')) {
                    cur.push(ch);
                    continue;
                }
                if !cur.trim().is_empty() {
                    out.push((neg, cur.trim().to_string()));
                    cur.clear();
                    neg = ch == '-';
                } else if ch == '-' {
                    neg = !neg;
                }
                seen_any = true;
            }
            c if c.is_whitespace() => cur.push(c),
            c => {
                cur.push(c);
                seen_any = true;
            }
        }
    }
    if !cur.trim().is_empty() {
        out.push((neg, cur.trim().to_string()));
    } else if seen_any {
        return Err(parse_error(s, "dangling sign"));
    }
    if out.is_empty() {
        return Err(parse_error(s, "empty polynomial"));
    }
    if out.len() == 1 && out[0].1 == "0" {
        return Ok(Vec::new());
    }
    Ok(out)
}

fn format_term<R: CoeffRing>(ring: &R, vars: &VarSet, m: &Monomial, c: &R::Elem) -> String {
    let cs = ring.format_elem(c);
    if m.is_one() {
        return cs;
    }
    let ms = m.format(vars);
    if ring.is_one(c) {
        ms
    } else if cs == "-1" {
        format!("-{ms}")
    } else {
        format!("{cs}*{ms}")
    }
}

impl<R: CoeffRing> fmt::Display for MultiPoly<R> {
    /// Terms from the largest in graded-lex order down.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let t = format_term(&self.ring, &self.vars, m, c);
            match (i, t.strip_prefix('-')) {
                (0, _) => write!(f, "{t}")?,
                (_, Some(rest)) => write!(f, " - {rest}")?,
                (_, None) => write!(f, " + {t}")?,
            }
        }
        Ok(())
    }
}

impl<R: CoeffRing> Add for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn add(self, rhs: Self) -> MultiPoly<R> {
        MultiPoly::add(self, rhs)
    }
}

impl<R: CoeffRing> Sub for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn sub(self, rhs: Self) -> MultiPoly<R> {
        MultiPoly::sub(self, rhs)
    }
}

impl<R: CoeffRing> Mul for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn mul(self, rhs: Self) -> MultiPoly<R> {
        MultiPoly::mul(self, rhs)
    }
}

impl<R: CoeffRing> Neg for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn neg(self) -> MultiPoly<R> {
        MultiPoly::neg(self)
    }
}

/// A ring endomorphism given by the images of the variables, required to
/// have order dividing `order` and to preserve weighted degree.
#[derive(Clone, Debug)]
pub struct RingAction<R: CoeffRing> {
    images: Vec<MultiPoly<R>>,
    order: u64,
}

impl<R: CoeffRing> RingAction<R> {
    pub fn new(images: Vec<MultiPoly<R>>, order: u64) -> Result<Self, RingError> {
        let vars = images.first().map(|g| g.vars().clone()).ok_or_else(|| RingError::Invalid("empty action".into()))?;
        if images.len() != vars.len() || images.iter().any(|g| *g.vars() != vars) {
            return Err(RingError::Invalid("action images must be given over its own variables, one per variable".into()));
        }
        for (i, g) in images.iter().enumerate() {
            let w = vars.weight(i) as i64;
            if !g.is_homogeneous_of_degree(w) {
                return Err(RingError::Invalid(format!("image of {} is not homogeneous of degree {}", vars.name(i), w)));
            }
        }
        let action = RingAction { images, order };
        for i in 0..vars.len() {
            let x = MultiPoly::var_index(action.images[0].ring().clone(), vars.clone(), i);
            let y = action.iterate(&x, order);
            if y != x {
                return Err(RingError::NotOrderP { order, detail: format!("{} maps to {}", vars.name(i), y) });
            }
        }
        Ok(action)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        self.images[0].vars()
    }

    pub fn images(&self) -> &[MultiPoly<R>] {
        &self.images
    }

    fn iterate(&self, f: &MultiPoly<R>, k: u64) -> MultiPoly<R> {
        let mut g = f.clone();
        for _ in 0..k {
            g = g.substitute(&self.images);
        }
        g
    }

    /// `σ^k(f)`, with `k` reduced modulo the order.
    pub fn apply(&self, f: &MultiPoly<R>, k: i64) -> Result<MultiPoly<R>, RingError> {
        let f = f.embed(self.vars())?;
        Ok(self.iterate(&f, k.rem_euclid(self.order as i64) as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PLocal;
    use proptest::prelude::*;

    fn tmf2() -> (PLocal, Arc<VarSet>) {
        (PLocal::new(3), VarSet::weighted(&[("l1", 4), ("l2", 4)]))
    }

    fn p(s: &str) -> MultiPoly<PLocal> {
        let (r, v) = tmf2();
        MultiPoly::parse(r, v, s).unwrap()
    }

    fn tmf2_action() -> RingAction<PLocal> {
        RingAction::new(vec![p("l2 - l1"), p("-l1")], 3).unwrap()
    }

    #[test]
    fn canonical_text_form() {
        assert_eq!(p("8*l2 + 8*l1").to_string(), "8*l1 + 8*l2");
        assert_eq!(p("l2^2 + 3 - l1*l2").to_string(), "-l1*l2 + l2^2 + 3");
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p("-3/2*l1^2").to_string(), "-3/2*l1^2");
        assert_eq!(p("l1 - l1").to_string(), "0");
    }

    #[test]
    fn json_round_trip() {
        let f = p("8*l1 + 8*l2 - 1/2");
        let j = serde_json::to_string(&f.to_json()).unwrap();
        assert_eq!(j, r#"{"vars":["l1","l2"],"terms":[{"exp":[1,0],"coef":"8"},{"exp":[0,1],"coef":"8"},{"exp":[0,0],"coef":"-1/2"}]}"#);
        let (r, v) = tmf2();
        let back = MultiPoly::from_json(r, v, &serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn divide_by_p_examples() {
        assert_eq!(p("3*l1").divide_by_p().unwrap(), p("l1"));
        assert_eq!(p("0").divide_by_p().unwrap(), p("0"));
        let err = p("l1").divide_by_p().unwrap_err();
        assert_eq!(err, RingError::NotDivisible { term: "l1".into(), prime: 3 });
    }

    #[test]
    fn tmf2_action_examples() {
        let g = tmf2_action();
        assert_eq!(g.apply(&p("-l1 - l2"), 1).unwrap(), p("2*l1 - l2"));
        assert_eq!(g.apply(&p("l1"), 3).unwrap(), p("l1"));
        assert_eq!(g.apply(&p("l1*l2 + 5"), 0).unwrap(), p("l1*l2 + 5"));
        assert_eq!(g.apply(&p("l1"), -1).unwrap(), g.apply(&p("l1"), 2).unwrap());
    }

    #[test]
    fn unknown_variable_is_reported() {
        let g = tmf2_action();
        let vars = VarSet::new(&["l1", "q"]);
        let f = MultiPoly::parse(PLocal::new(3), vars, "q").unwrap();
        assert_eq!(g.apply(&f, 1).unwrap_err(), RingError::UnknownVariable("q".into()));
    }

    #[test]
    fn actions_of_wrong_order_are_rejected() {
        let err = RingAction::new(vec![p("l2"), p("l1")], 3).unwrap_err();
        assert!(matches!(err, RingError::NotOrderP { .. }));
        let err = RingAction::new(vec![p("l1^2"), p("l2")], 1).unwrap_err();
        assert!(matches!(err, RingError::Invalid(_)));
    }

    #[test]
    fn graded_lex_enumeration() {
        let ms = monomials_of_degree(3, 2);
        let v = VarSet::new(&["a", "b", "c"]);
        let s: Vec<String> = ms.iter().map(|m| m.format(&v)).collect();
        assert_eq!(s, ["a^2", "a*b", "a*c", "b^2", "b*c", "c^2"]);
        assert!(ms.windows(2).all(|w| w[0] > w[1]));
    }

    fn small_poly() -> impl Strategy<Value = MultiPoly<PLocal>> {
        proptest::collection::vec(((0u32..4, 0u32..4), -20i64..20), 0..6).prop_map(|ts| {
            let (r, v) = tmf2();
            MultiPoly::from_terms(
                r,
                v,
                ts.into_iter().map(|((a, b), c)| (Monomial::from_exponents(&[a, b]), r.from_i64(c))),
            )
        })
    }

    proptest! {
        #[test]
        fn action_has_order_three(f in small_poly()) {
            let g = tmf2_action();
            prop_assert_eq!(g.apply(&f, 3).unwrap(), f);
        }

        #[test]
        fn divide_by_p_inverts_multiplication(f in small_poly()) {
            prop_assert_eq!(f.scale_i64(3).divide_by_p().unwrap(), f);
        }

        #[test]
        fn parse_inverts_display(f in small_poly()) {
            prop_assert_eq!(p(&f.to_string()), f);
        }

        #[test]
        fn reduction_is_multiplicative(f in small_poly(), g in small_poly()) {
            prop_assert_eq!(f.mul(&g).reduce_mod_p(), f.reduce_mod_p().mul(&g.reduce_mod_p()));
        }
    }
}
