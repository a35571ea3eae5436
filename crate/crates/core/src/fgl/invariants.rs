use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FglError, FormalGroupLaw};
use crate::linalg::Echelon;
use crate::ring::{CoeffRing, Monomial, MultiPoly, ResidueRing, TruncSeries, VarSet};

/// `[n](x)`, the `n`-fold formal sum of `x` with itself.
pub fn n_series<R: CoeffRing>(f: &FormalGroupLaw<R>, n: u32) -> Result<TruncSeries<R>, FglError> {
    assert!(n >= 1, "n-series needs n >= 1");
    let ring = f.ring().clone();
    let cv = f.coeff_vars().clone();
    let x = TruncSeries::var(ring, VarSet::new(&["x"]), cv, f.trunc(), 0);
    let mut acc = x.clone();
    for _ in 1..n {
        acc = f.apply(&acc, &x)?;
    }
    Ok(acc)
}

fn check_prime<R: CoeffRing>(f: &FormalGroupLaw<R>, p: u64) -> Result<(), FglError> {
    if f.ring().prime() != p {
        return Err(FglError::CheckFailed {
            detail: format!("law is defined over {}, cannot reduce mod {p}", f.ring().name()),
        });
    }
    Ok(())
}

/// The coefficient of `x^p` in `[p](x)`, reduced mod `p`.
pub fn extract_v1<R: CoeffRing>(f: &FormalGroupLaw<R>, p: u64) -> Result<MultiPoly<ResidueRing>, FglError> {
    check_prime(f, p)?;
    let needed = p as u32 + 1;
    if f.trunc() < needed {
        return Err(FglError::TruncationTooSmall { needed, got: f.trunc() });
    }
    let law = truncated(f, needed);
    Ok(n_series(&law, p as u32)?.coeff_exps(&[p as u32]).reduce_mod_p())
}

fn truncated<R: CoeffRing>(f: &FormalGroupLaw<R>, n: u32) -> FormalGroupLaw<R> {
    FormalGroupLaw { f: f.series().truncate(n) }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum V2Method {
    /// `v1` is linear with a unit coefficient on `eliminated`, which is
    /// replaced by its solution of `v1 = 0`.
    Substitution { eliminated: String },
    /// Normal form against the degree-graded part of the ideal `(v1)`.
    Echelon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct V2Result {
    pub v1: MultiPoly<ResidueRing>,
    /// The `x^{p^2}` coefficient mod `p`, before reducing modulo `v1`.
    pub raw: MultiPoly<ResidueRing>,
    pub v2: MultiPoly<ResidueRing>,
    pub method: V2Method,
}

/// `v2` modulo `(p, v1)`, eliminating the last variable that appears
/// linearly in `v1` with a unit coefficient.
pub fn extract_v2<R: CoeffRing>(f: &FormalGroupLaw<R>, p: u64) -> Result<V2Result, FglError> {
    extract_v2_eliminating(f, p, None)
}

/// As [`extract_v2`], choosing the eliminated variable by name. When `v1`
/// is not linear, or `eliminate` does not occur in it with a unit
/// coefficient, the result is the echelon normal form instead.
pub fn extract_v2_eliminating<R: CoeffRing>(
    f: &FormalGroupLaw<R>,
    p: u64,
    eliminate: Option<&str>,
) -> Result<V2Result, FglError> {
    check_prime(f, p)?;
    let needed = (p * p) as u32 + 1;
    if f.trunc() < needed {
        return Err(FglError::TruncationTooSmall { needed, got: f.trunc() });
    }
    let law = truncated(f, needed);
    let series = n_series(&law, p as u32)?;
    let v1 = series.coeff_exps(&[p as u32]).reduce_mod_p();
    let raw = series.coeff_exps(&[(p * p) as u32]).reduce_mod_p();
    let normal = reduce_mod_ideal(&raw, &v1)?;

    let target = match eliminate {
        Some(name) => f.coeff_vars().index_of(name),
        None => linear_unit_vars(&v1).last().copied(),
    };
    let (v2, method) = match target.filter(|i| linear_unit_vars(&v1).contains(i)) {
        Some(i) => {
            let v2 = substitute_root(&raw, &v1, i);
            // Both are representatives of the same class, so their normal
            // forms must coincide.
            let check = reduce_mod_ideal(&v2, &v1)?;
            if check != normal {
                return Err(FglError::CheckFailed {
                    detail: format!("substitution gives {v2}, echelon normal form gives {normal}"),
                });
            }
            (v2, V2Method::Substitution { eliminated: v1.vars().name(i).to_string() })
        }
        None => (normal, V2Method::Echelon),
    };
    Ok(V2Result { v1, raw, v2, method })
}

/// Variables `i` such that `v1` is linear and `x_i` has a unit coefficient.
fn linear_unit_vars(v1: &MultiPoly<ResidueRing>) -> Vec<usize> {
    if v1.terms().any(|(m, _)| m.degree() != 1) {
        return Vec::new();
    }
    let n = v1.vars().len();
    (0..n).filter(|&i| v1.coeff(&Monomial::var(n, i)) != 0).collect()
}

/// Replaces `x_i` in `g` by the solution of `v1 = 0`, with `v1` linear.
fn substitute_root(g: &MultiPoly<ResidueRing>, v1: &MultiPoly<ResidueRing>, i: usize) -> MultiPoly<ResidueRing> {
    let ring = *v1.ring();
    let n = v1.vars().len();
    let lead = ring.inverse(&v1.coeff(&Monomial::var(n, i))).expect("unit coefficient");
    let root = v1.sub(&MultiPoly::var_index(ring, v1.vars().clone(), i).scale(&v1.coeff(&Monomial::var(n, i))));
    let root = root.scale(&ring.neg(&lead));
    let images: Vec<MultiPoly<ResidueRing>> =
        (0..n).map(|j| if j == i { root.clone() } else { MultiPoly::var_index(ring, v1.vars().clone(), j) }).collect();
    g.substitute(&images)
}

/// Weighted degree of a homogeneous polynomial; `None` for zero.
fn weighted_degree(g: &MultiPoly<ResidueRing>) -> Result<Option<i64>, FglError> {
    let vars = g.vars();
    let degs: BTreeSet<i64> = g.terms().map(|(m, _)| m.weighted_degree(vars)).collect();
    match degs.len() {
        0 => Ok(None),
        1 => Ok(degs.into_iter().next()),
        _ => Err(FglError::NotHomogeneous(g.to_string())),
    }
}

/// Monomials in `n` variables with the given positive weights and weighted degree `d`.
fn monomials_of_weight(weights: &[i64], d: i64) -> Vec<Monomial> {
    fn rec(i: usize, left: i64, w: &[i64], cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == w.len() {
            if left == 0 {
                out.push(Monomial::from_exponents(cur));
            }
            return;
        }
        let max = if w[i] > 0 { left / w[i] } else { 0 };
        for e in (0..=max.max(0)).rev() {
            cur[i] = e as u32;
            rec(i + 1, left - e * w[i], w, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if d >= 0 {
        rec(0, d, weights, &mut vec![0; weights.len()], &mut out);
    }
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// Canonical representative of `g` modulo the principal ideal `(h)` over
/// `F_p`, for homogeneous `g` and `h` with positive variable weights.
///
/// The degree-`deg g` part of the ideal is spanned by `h` times monomials.
/// With columns in descending monomial order, the remainder supported off
/// the leading monomials of that span is unique.
pub fn reduce_mod_ideal(
    g: &MultiPoly<ResidueRing>,
    h: &MultiPoly<ResidueRing>,
) -> Result<MultiPoly<ResidueRing>, FglError> {
    let vars: Arc<VarSet> = g.vars().clone();
    let (Some(dg), Some(dh)) = (weighted_degree(g)?, weighted_degree(h)?) else {
        return Ok(if h.is_zero() { g.clone() } else { MultiPoly::zero(*g.ring(), vars) });
    };
    if dg < dh {
        return Ok(g.clone());
    }
    let weights: Vec<i64> = (0..vars.len()).map(|i| vars.weight(i) as i64).collect();
    if weights.iter().any(|&w| w <= 0) {
        return Err(FglError::NotHomogeneous(format!("{h} (variables need positive weight)")));
    }
    let ring = *g.ring();
    let p = ring.prime() as u32;
    let basis = monomials_of_weight(&weights, dg);
    let col = |m: &Monomial| basis.iter().position(|b| b == m).expect("monomial of the right degree");
    let to_vec = |f: &MultiPoly<ResidueRing>| {
        let mut v = vec![0u32; basis.len()];
        for (m, c) in f.terms() {
            v[col(m)] = *c as u32;
        }
        v
    };
    let mut ech = Echelon::new(p, basis.len());
    for m in monomials_of_weight(&weights, dg - dh) {
        ech.insert(to_vec(&h.mul_term(&m, &1)));
    }
    let mut reduced = to_vec(g);
    ech.reduce(&mut reduced);
    let terms = basis.iter().zip(reduced).map(|(m, c)| (m.clone(), c as u64));
    Ok(MultiPoly::from_terms(ring, vars, terms))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitContribution {
    pub representative: String,
    pub size: u32,
    pub coefficient: String,
    pub contribution: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultivarReport {
    pub p: u64,
    pub cyclic_invariant: bool,
    pub product_coefficient: String,
    pub p_series_coefficient: String,
    pub congruent_mod_p: bool,
    pub difference: String,
    pub orbits: Vec<OrbitContribution>,
}

/// Expands `x1 +_F ... +_F xp` through total degree `p` and compares the
/// coefficient of `x1...xp` with that of `x^p` in `[p](x)`.
///
/// Setting every `xi = x` turns the first series into `[p](x)`, so the two
/// coefficients differ by the sum of all other degree-`p` coefficients. These
/// fall into free cyclic orbits, each contributing `p` times one coefficient.
pub fn multivar_sum_coeff_check<R: CoeffRing>(f: &FormalGroupLaw<R>, p: u64) -> Result<MultivarReport, FglError> {
    check_prime(f, p)?;
    let n = p as usize;
    let needed = p as u32 + 1;
    if f.trunc() < needed {
        return Err(FglError::TruncationTooSmall { needed, got: f.trunc() });
    }
    let law = truncated(f, needed);
    let ring = f.ring().clone();
    let cv = f.coeff_vars().clone();
    let xs = VarSet::indexed("x", n, 1);
    let xi = |i: usize| TruncSeries::var(ring.clone(), xs.clone(), cv.clone(), needed, i);
    let mut sum = xi(0);
    for i in 1..n {
        sum = law.apply(&sum, &xi(i))?;
    }

    let fail = |detail: String| FglError::CheckFailed { detail };
    for (m, c) in sum.terms() {
        let r = m.rotate();
        if sum.coeff(&r) != *c {
            return Err(fail(format!(
                "sum is not cyclically invariant: orbit of {} has coefficients {} and {}",
                m.format(&xs),
                c,
                sum.coeff(&r)
            )));
        }
    }

    let product = Monomial::from_exponents(&vec![1; n]);
    let prod_coeff = sum.coeff(&product);
    let series_coeff = n_series(&law, p as u32)?.coeff_exps(&[p as u32]);
    let difference = series_coeff.sub(&prod_coeff);

    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    let mut total = MultiPoly::zero(ring.clone(), cv.clone());
    for (m, c) in sum.terms().filter(|(m, _)| m.degree() == p as u32 && **m != product) {
        if seen.contains(m) {
            continue;
        }
        let mut orbit = vec![m.clone()];
        let mut r = m.rotate();
        while r != *m {
            orbit.push(r.clone());
            r = r.rotate();
        }
        let contribution = c.scale_i64(orbit.len() as i64);
        if contribution.divide_by_p().is_err() {
            return Err(fail(format!(
                "orbit of {} contributes {}, not a multiple of {p}",
                m.format(&xs),
                contribution
            )));
        }
        total.add_assign(&contribution);
        orbits.push(OrbitContribution {
            representative: m.format(&xs),
            size: orbit.len() as u32,
            coefficient: c.to_string(),
            contribution: contribution.to_string(),
        });
        seen.extend(orbit);
    }
    if total != difference {
        return Err(fail(format!("orbit contributions sum to {total}, expected {difference}")));
    }
    let congruent = difference.reduce_mod_p().is_zero();
    if !congruent {
        return Err(fail(format!("{prod_coeff} and {series_coeff} differ by {difference} mod {p}")));
    }
    Ok(MultivarReport {
        p,
        cyclic_invariant: true,
        product_coefficient: prod_coeff.to_string(),
        p_series_coefficient: series_coeff.to_string(),
        congruent_mod_p: congruent,
        difference: difference.to_string(),
        orbits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::{curve_formal_group, WeierstrassCurve};
    use crate::ring::PLocal;

    fn no_vars() -> Arc<VarSet> {
        VarSet::new(&[])
    }

    #[test]
    fn additive_and_multiplicative_three_series() {
        let r = PLocal::new(3);
        let add = FormalGroupLaw::additive(r, no_vars(), 8);
        let s = n_series(&add, 3).unwrap();
        assert_eq!(s.to_string(), "3*x + O(deg 8)");
        let mul = FormalGroupLaw::multiplicative(r, no_vars(), 8);
        let s = n_series(&mul, 3).unwrap();
        assert_eq!(s.to_string(), "3*x + 3*x^2 + x^3 + O(deg 8)");
    }

    #[test]
    fn v1_of_the_basic_laws() {
        let r = PLocal::new(3);
        let mul = FormalGroupLaw::multiplicative(r, no_vars(), 8);
        assert_eq!(extract_v1(&mul, 3).unwrap().to_string(), "1");
        let add = FormalGroupLaw::additive(r, no_vars(), 8);
        assert!(extract_v1(&add, 3).unwrap().is_zero());
        assert!(extract_v2(&add, 3).is_err());
        let add10 = FormalGroupLaw::additive(r, no_vars(), 10);
        assert!(extract_v2(&add10, 3).unwrap().v2.is_zero());
    }

    #[test]
    fn wrong_prime_is_rejected() {
        let add = FormalGroupLaw::additive(PLocal::new(3), no_vars(), 8);
        assert!(extract_v1(&add, 5).is_err());
    }

    #[test]
    fn tmf2_v2_both_eliminations() {
        let c = WeierstrassCurve::tmf2(PLocal::new(3));
        let f = curve_formal_group(&c, 10).unwrap();
        let a = extract_v2(&f, 3).unwrap();
        assert_eq!(a.v1.to_string(), "2*l1 + 2*l2");
        assert_eq!(a.method, V2Method::Substitution { eliminated: "l2".into() });
        // The x^9 coefficient 8(27, -76, 98, -76, 27) reduces to 2*l1^4 under l2 = -l1.
        assert_eq!(a.v2.to_string(), "2*l1^4");
        let b = extract_v2_eliminating(&f, 3, Some("l1")).unwrap();
        assert_eq!(b.v2.to_string(), "2*l2^4");
    }

    #[test]
    fn truncation_five_is_too_small_for_v2() {
        let c = WeierstrassCurve::tmf2(PLocal::new(3));
        let f = curve_formal_group(&c, 5).unwrap();
        assert_eq!(extract_v2(&f, 3).unwrap_err(), FglError::TruncationTooSmall { needed: 10, got: 5 });
    }

    #[test]
    fn ideal_reduction_nonlinear() {
        let f3 = ResidueRing::prime_field(3);
        let vars = VarSet::new(&["a", "b"]);
        let p = |s: &str| MultiPoly::parse(f3, vars.clone(), s).unwrap();
        // a^2 = b^2 mod (a^2 - b^2): normal forms coincide.
        let h = p("a^2 - b^2");
        assert_eq!(reduce_mod_ideal(&p("a^3*b"), &h).unwrap(), reduce_mod_ideal(&p("a*b^3"), &h).unwrap());
        assert!(reduce_mod_ideal(&p("a^4 - b^4"), &h).unwrap().is_zero());
        assert!(reduce_mod_ideal(&p("a + b^2"), &h).is_err());
    }

    #[test]
    fn multivar_basic_laws() {
        let r = PLocal::new(3);
        let mul = FormalGroupLaw::multiplicative(r, no_vars(), 4);
        let rep = multivar_sum_coeff_check(&mul, 3).unwrap();
        assert_eq!((rep.product_coefficient.as_str(), rep.p_series_coefficient.as_str()), ("1", "1"));
        assert_eq!(rep.difference, "0");
        let add = FormalGroupLaw::additive(r, no_vars(), 4);
        let rep = multivar_sum_coeff_check(&add, 3).unwrap();
        assert_eq!((rep.product_coefficient.as_str(), rep.p_series_coefficient.as_str()), ("0", "0"));
    }

    fn tmf2_law(trunc: u32) -> FormalGroupLaw<PLocal> {
        curve_formal_group(&WeierstrassCurve::tmf2(PLocal::new(3)), trunc).unwrap()
    }

    #[test]
    fn tmf2_three_series_through_x9() {
        let f = tmf2_law(10);
        let s = n_series(&f, 3).unwrap();
        let p = |t: &str| MultiPoly::parse(PLocal::new(3), f.coeff_vars().clone(), t).unwrap();
        let expected = [
            (1, "3"),
            (3, "8*l1 + 8*l2"),
            (5, "24*l1^2 - 48*l1*l2 + 24*l2^2"),
            (7, "72*l1^3 - 72*l1^2*l2 - 72*l1*l2^2 + 72*l2^3"),
            (9, "216*l1^4 - 608*l1^3*l2 + 784*l1^2*l2^2 - 608*l1*l2^3 + 216*l2^4"),
        ];
        for (k, c) in expected {
            assert_eq!(s.coeff_exps(&[k]), p(c), "coefficient of x^{k}");
        }
        for k in [0, 2, 4, 6, 8] {
            assert!(s.coeff_exps(&[k]).is_zero());
        }
    }

    #[test]
    fn n_series_is_additive() {
        let f = tmf2_law(8);
        let series: Vec<_> = (1..=8).map(|n| n_series(&f, n).unwrap()).collect();
        for m in 1..=4 {
            for n in 1..=4 {
                let sum = f.apply(&series[m - 1], &series[n - 1]).unwrap();
                assert_eq!(sum, series[m + n - 1], "[{m}] + [{n}]");
            }
        }
    }

    #[test]
    fn v1_ignores_quadratic_coordinate_change() {
        let r = PLocal::new(3);
        let f = tmf2_law(6);
        let all = VarSet::weighted(&[("l1", 4), ("l2", 4), ("c", 2)]);
        let f = f.embed_coeffs(&all).unwrap();
        let one = MultiPoly::one(r, all.clone());
        let c = MultiPoly::var(r, all.clone(), "c").unwrap();
        let zero = MultiPoly::zero(r, all.clone());
        let phi = TruncSeries::univariate(r, "z", all.clone(), 6, &[zero, one, c]);
        let g = f.change_coordinates(&phi).unwrap();
        assert_ne!(g, f);
        assert_eq!(extract_v1(&g, 3).unwrap(), extract_v1(&f, 3).unwrap());
    }

    #[test]
    fn multivar_tmf2() {
        let rep = multivar_sum_coeff_check(&tmf2_law(4), 3).unwrap();
        assert!(rep.congruent_mod_p);
        assert!(rep.orbits.iter().all(|o| o.size == 3));
        assert_eq!(rep.p_series_coefficient, "8*l1 + 8*l2");
    }
}
