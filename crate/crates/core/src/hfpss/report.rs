use serde::{Deserialize, Serialize};

use super::{e2_page, run_differentials, HfpssError, SSClass, Window};
use crate::cpmod::{tate_cohomology, Parity};
use crate::ring::PLocal;
use crate::symdecomp::sym_module;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRef {
    pub name: String,
    pub stem: i64,
    pub filtration: i64,
}

impl From<&SSClass> for ClassRef {
    fn from(c: &SSClass) -> Self {
        ClassRef { name: c.name(), stem: c.stem(), filtration: c.s }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvennessReport {
    pub p: u64,
    pub window: Window,
    /// Stem period of `E_∞`, the stem of `δ^p`.
    pub period: i64,
    /// Reduced `E_2` classes in stem -1 within the window.
    pub e2_stem_minus_one: Vec<ClassRef>,
    pub e2_stem_minus_one_empty: bool,
    /// Stems congruent to 0, -1 or -2 modulo the period, inside the window.
    pub checked_stems: Vec<i64>,
    /// Positive-filtration `E_∞` classes in the checked stems.
    pub einf_positive_filtration: Vec<ClassRef>,
    pub einf_clean: bool,
    pub surviving: Vec<ClassRef>,
    pub chart: String,
}

impl EvennessReport {
    pub fn passed(&self) -> bool {
        self.e2_stem_minus_one_empty && self.einf_clean
    }

    /// The first offending class as an error.
    pub fn into_result(self) -> Result<Self, HfpssError> {
        let bad = self.e2_stem_minus_one.first().or(self.einf_positive_filtration.first());
        match bad {
            Some(c) => Err(HfpssError::EvennessViolation {
                class: c.name.clone(),
                stem: c.stem,
                filtration: c.filtration,
            }),
            None => Ok(self),
        }
    }
}

/// Checks that stem -1 of `E_2` has no reduced classes and that `E_∞` has
/// nothing in positive filtration in stems 0, -1 and -2 or their translates
/// by the period.
pub fn evenness_report(p: u64, window: Window) -> Result<EvennessReport, HfpssError> {
    if !(window.stem_min <= -2 && window.stem_max >= 0) {
        return Err(HfpssError::WindowTooSmall(format!(
            "stems {}..{} must contain -2, -1 and 0",
            window.stem_min, window.stem_max
        )));
    }
    let top = 2 * (p as i64 - 1).pow(2);
    if window.filt_min > 0 || window.filt_max < top {
        return Err(HfpssError::WindowTooSmall(format!(
            "filtrations {}..{} must cover 0..{top}",
            window.filt_min, window.filt_max
        )));
    }
    let e2 = e2_page(p, window);
    let einf = run_differentials(&e2)?;
    let period = 2 * (p as i64) * (p as i64);

    let e2_minus_one: Vec<ClassRef> = e2.reduced_classes().filter(|(c, _)| c.stem() == -1).map(|(c, _)| c.into()).collect();
    let checked: Vec<i64> =
        (window.stem_min..=window.stem_max).filter(|s| [0, period - 1, period - 2].contains(&s.rem_euclid(period))).collect();
    let survivors = einf.surviving();
    let offending: Vec<ClassRef> =
        survivors.iter().filter(|c| c.s > 0 && checked.contains(&c.stem())).map(ClassRef::from).collect();
    Ok(EvennessReport {
        p,
        window,
        period,
        e2_stem_minus_one_empty: e2_minus_one.is_empty(),
        e2_stem_minus_one: e2_minus_one,
        checked_stems: checked,
        einf_clean: offending.is_empty(),
        einf_positive_filtration: offending,
        surviving: survivors.iter().map(ClassRef::from).collect(),
        chart: einf.chart(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TateCrossCheck {
    pub p: u64,
    pub t: i64,
    pub cutoff: u32,
    /// Symmetric degree whose Tate cohomology models internal degree `t`.
    pub sym_degree: u32,
    /// `F_p`-dimensions after tensoring with the Galois coefficients.
    pub tate_even: usize,
    pub tate_odd: usize,
    /// Reduced monomials of internal degree `t` per positive filtration of
    /// each parity, counted over `F_p`.
    pub monomials_even: usize,
    pub monomials_odd: usize,
    pub stabilized: bool,
}

fn sym_degree(p: u64, t: i64, cutoff: u32) -> Option<u32> {
    let r = (-t / 2).rem_euclid(p as i64) as u32;
    (r <= cutoff).then(|| cutoff - (cutoff - r) % p as u32)
}

fn tate_dims(p: u64, m: u32) -> Result<(usize, usize), HfpssError> {
    let module = sym_module(p, m, PLocal::new(p));
    Ok((tate_cohomology(&module, Parity::Even)?.dim(), tate_cohomology(&module, Parity::Odd)?.dim()))
}

/// Compares the Tate cohomology of the degree-`t` part of
/// `Sym(ρ̄)[Nm^{-1}]` over `Z_(p)` with the reduced monomials of internal
/// degree `t`. Inverting the norm identifies the degree-`t` part with the
/// largest symmetric power `Sym^m` with `m <= cutoff` and `m = -t/2 mod p`;
/// the comparison is repeated at `cutoff + 2` to confirm it has settled.
///
/// The lattice is handled exactly: reducing it mod `p^N` first can hide its
/// kernels, see [`tate_cohomology`].
pub fn tate_cross_check(p: u64, t: i64, cutoff: u32) -> Result<TateCrossCheck, HfpssError> {
    if !matches!(p, 3 | 5 | 7) {
        return Err(HfpssError::Unsupported(format!("Tate cross-check needs p in {{3,5,7}}, got {p}")));
    }
    if t % 2 != 0 {
        return Err(HfpssError::Unsupported(format!("internal degree {t} is odd; the model is concentrated in even degrees")));
    }
    let galois = p as usize - 1;
    let m = sym_degree(p, t, cutoff)
        .ok_or_else(|| HfpssError::Unsupported(format!("cutoff {cutoff} is below the first symmetric degree")))?;
    let (even, odd) = tate_dims(p, m)?;
    let next = sym_degree(p, t, cutoff + 2).expect("larger cutoff");
    if tate_dims(p, next)? != (even, odd) {
        return Err(HfpssError::NotStabilized { t, cutoff, next: cutoff + 2 });
    }
    let two_p = 2 * p as i64;
    let monomials_even = usize::from(t.rem_euclid(two_p) == 0) * galois;
    let monomials_odd = usize::from(t.rem_euclid(two_p) == two_p - 2) * galois;
    let (tate_even, tate_odd) = (even * galois, odd * galois);
    if (tate_even, tate_odd) != (monomials_even, monomials_odd) {
        return Err(HfpssError::DimensionMismatch {
            t,
            detail: format!(
                "Tate cohomology has dimensions ({tate_even}, {tate_odd}), monomials give ({monomials_even}, {monomials_odd})"
            ),
        });
    }
    Ok(TateCrossCheck {
        p,
        t,
        cutoff,
        sym_degree: m,
        tate_even,
        tate_odd,
        monomials_even,
        monomials_odd,
        stabilized: true,
    })
}
