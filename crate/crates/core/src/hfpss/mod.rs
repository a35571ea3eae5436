//! A monomial-level engine for the homotopy fixed point spectral sequence of
//! `C_p` acting on height `p - 1` Morava E-theory.
//!
//! The reduced part of `E_2` is `F_p[α, β, δ^{±1}]/(α^2)` with
//! `|α| = (1, 2p-2)`, `|β| = (2, 2p^2-2p)` and `|δ| = (0, 2p)` in `(s, t)`
//! coordinates. The transfer image is carried as one opaque marker in
//! filtration 0 of each even stem. Two rounds of differentials are applied:
//!
//! * `d_{2p-1}(δ) = α β^{p-1} δ^{1-(p-1)^2}`, extended by the Leibniz rule;
//! * `d_{2(p-1)^2+1}(α δ^{(p-1)^3}) = β^{(p-1)^2+1}`, extended by the
//!   Leibniz rule over the survivors of the first round.
//!
//! Scalars live in `F_p` up to a single global unit, so only the Leibniz
//! factors matter.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpmod::CpError;
use crate::symdecomp::SymError;

mod report;

pub use report::{evenness_report, tate_cross_check, ClassRef, EvennessReport, TateCrossCheck};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HfpssError {
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("evenness violated by {class} at stem {stem}, filtration {filtration}")]
    EvennessViolation { class: String, stem: i64, filtration: i64 },
    #[error("Tate comparison at t={t} differs between cutoffs {cutoff} and {next}; increase the cutoff")]
    NotStabilized { t: i64, cutoff: u32, next: u32 },
    #[error("dimension mismatch at t={t}: {detail}")]
    DimensionMismatch { t: i64, detail: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Module(#[from] CpError),
}

/// Stem range and filtration range, both inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub stem_min: i64,
    pub stem_max: i64,
    pub filt_min: i64,
    pub filt_max: i64,
}

impl Window {
    pub fn new(stems: (i64, i64), filts: (i64, i64)) -> Self {
        Window { stem_min: stems.0, stem_max: stems.1, filt_min: filts.0.max(0), filt_max: filts.1 }
    }

    /// Stems as given, filtrations from 0 up to where every class of `E_∞`
    /// lives, plus room for the longest differential.
    pub fn stems(p: u64, lo: i64, hi: i64) -> Self {
        let (_, r2) = lengths(p);
        Window::new((lo, hi), (0, 2 * ((p as i64 - 1).pow(2)) + r2))
    }

    pub fn contains(&self, stem: i64, filt: i64) -> bool {
        (self.stem_min..=self.stem_max).contains(&stem) && (self.filt_min..=self.filt_max).contains(&filt)
    }

    fn expand(&self, stems: i64, filts: i64) -> Self {
        Window {
            stem_min: self.stem_min - stems,
            stem_max: self.stem_max + stems,
            filt_min: (self.filt_min - filts).max(0),
            filt_max: self.filt_max + filts,
        }
    }
}

/// `(r1, r2) = (2p - 1, 2(p-1)^2 + 1)`.
pub fn lengths(p: u64) -> (i64, i64) {
    let p = p as i64;
    (2 * p - 1, 2 * (p - 1) * (p - 1) + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassKind {
    /// `α^eps β^b δ^d` with a nonzero scalar.
    Reduced { eps: u8, b: u32, d: i64, scalar: u64 },
    /// Opaque marker for the transfer image in an even stem.
    TransferImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SSClass {
    pub kind: ClassKind,
    pub s: i64,
    pub t: i64,
}

impl SSClass {
    pub fn reduced(p: u64, eps: u8, b: u32, d: i64) -> Self {
        let p = p as i64;
        let s = eps as i64 + 2 * b as i64;
        let t = eps as i64 * (2 * p - 2) + b as i64 * (2 * p * p - 2 * p) + d * 2 * p;
        SSClass { kind: ClassKind::Reduced { eps, b, d, scalar: 1 }, s, t }
    }

    pub fn transfer_marker(stem: i64) -> Self {
        assert!(stem % 2 == 0, "transfer markers sit in even stems");
        SSClass { kind: ClassKind::TransferImage, s: 0, t: stem }
    }

    pub fn stem(&self) -> i64 {
        self.t - self.s
    }

    pub fn filtration(&self) -> i64 {
        self.s
    }

    fn exponents(&self) -> Option<(u8, u32, i64)> {
        match self.kind {
            ClassKind::Reduced { eps, b, d, .. } => Some((eps, b, d)),
            ClassKind::TransferImage => None,
        }
    }

    pub fn name(&self) -> String {
        let Some((eps, b, d)) = self.exponents() else {
            return format!("tr[{}]", self.stem());
        };
        let mut parts = Vec::new();
        if eps == 1 {
            parts.push("α".to_string());
        }
        match b {
            0 => {}
            1 => parts.push("β".into()),
            _ => parts.push(format!("β^{b}")),
        }
        match d {
            0 => {}
            1 => parts.push("δ".into()),
            _ => parts.push(format!("δ^{d}")),
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Alive,
    /// Supports a nonzero `d_r` hitting the class at `partner`.
    Source { round: i64, partner: (i64, i64) },
    /// Hit by `d_r` from the class at `partner`.
    Target { round: i64, partner: (i64, i64) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub r: i64,
    pub sources: usize,
    pub targets: usize,
}

/// A page `E_r` of the spectral sequence on a window.
///
/// The classes cover the user window enlarged by the differential lengths so
/// that every class in the user window has its partners available.
#[derive(Debug, Clone, PartialEq)]
pub struct SSPage {
    p: u64,
    round: i64,
    window: Window,
    working: Window,
    reduced: BTreeMap<(i64, i64), (SSClass, Status)>,
    markers: BTreeMap<i64, SSClass>,
    rounds: Vec<RoundSummary>,
}

/// `E_2` on the window: every reduced monomial and one transfer marker per
/// even stem.
pub fn e2_page(p: u64, window: Window) -> SSPage {
    assert!(p >= 3 && crate::ring::is_prime(p), "the engine models odd primes");
    let (r1, r2) = lengths(p);
    let working = window.expand(r1.max(r2), r1 + r2);
    let pi = p as i64;
    let mut reduced = BTreeMap::new();
    for s in working.filt_min..=working.filt_max {
        let eps = (s % 2) as u8;
        let b = (s / 2) as u32;
        // stem = base + 2p d
        let base = SSClass::reduced(p, eps, b, 0).stem();
        let d_min = -(base - working.stem_min).div_euclid(2 * pi);
        let d_max = (working.stem_max - base).div_euclid(2 * pi);
        for d in d_min..=d_max {
            let c = SSClass::reduced(p, eps, b, d);
            reduced.insert((c.stem(), c.s), (c, Status::Alive));
        }
    }
    let markers = (working.stem_min..=working.stem_max)
        .filter(|st| st % 2 == 0)
        .map(|st| (st, SSClass::transfer_marker(st)))
        .collect();
    SSPage { p, round: 2, window, working, reduced, markers, rounds: Vec::new() }
}

impl SSPage {
    pub fn prime(&self) -> u64 {
        self.p
    }

    /// The `r` in `E_r`; `None` once both differentials have run.
    pub fn round(&self) -> Option<i64> {
        (self.rounds.len() < 2).then_some(self.round)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// The enlarged window the engine actually populates.
    pub fn working_window(&self) -> Window {
        self.working
    }

    pub fn rounds(&self) -> &[RoundSummary] {
        &self.rounds
    }

    /// Reduced classes in the user window with their status.
    pub fn reduced_classes(&self) -> impl Iterator<Item = (&SSClass, &Status)> {
        self.reduced.values().filter(|(c, _)| self.window.contains(c.stem(), c.s)).map(|(c, st)| (c, st))
    }

    /// Transfer markers in the user window.
    pub fn transfer_markers(&self) -> impl Iterator<Item = &SSClass> {
        self.markers.values().filter(|c| self.window.contains(c.stem(), c.s))
    }

    /// Reduced classes still alive on this page, in the user window.
    pub fn surviving(&self) -> Vec<SSClass> {
        self.reduced_classes().filter(|(_, s)| **s == Status::Alive).map(|(c, _)| *c).collect()
    }

    pub fn class_at(&self, stem: i64, filt: i64) -> Option<(SSClass, Status)> {
        self.reduced.get(&(stem, filt)).copied()
    }

    /// Applies one round of differentials given by `rule`, which returns the
    /// target exponents and Leibniz scalar for a surviving class.
    fn apply_round(
        &mut self,
        r: i64,
        rule: impl Fn(u8, u32, i64) -> Option<((u8, u32, i64), u64)>,
    ) -> Result<(), HfpssError> {
        let p = self.p;
        let mut pairs = Vec::new();
        for (key, (c, st)) in &self.reduced {
            if *st != Status::Alive {
                continue;
            }
            let (eps, b, d) = c.exponents().expect("reduced class");
            let Some(((te, tb, td), scalar)) = rule(eps, b, d) else { continue };
            if scalar % p == 0 {
                continue;
            }
            let target = SSClass::reduced(p, te, tb, td);
            assert_eq!(target.stem(), c.stem() - 1, "d_{r} must lower the stem by one");
            assert_eq!(target.s, c.s + r, "d_{r} must raise filtration by {r}");
            let tkey = (target.stem(), target.s);
            match self.reduced.get(&tkey) {
                Some((_, Status::Alive)) => pairs.push((*key, tkey)),
                Some((t, st)) => panic!("d_{r}({}) hits {} which is already {:?}", c.name(), t.name(), st),
                None if self.window.contains(c.stem(), c.s) => {
                    return Err(HfpssError::WindowTooSmall(format!(
                        "d_{r}({}) leaves the working window at stem {}, filtration {}",
                        c.name(),
                        tkey.0,
                        tkey.1
                    )))
                }
                None => {}
            }
        }
        let mut hit = std::collections::BTreeSet::new();
        for (src, tgt) in &pairs {
            assert!(hit.insert(*tgt), "two sources hit the class at {tgt:?} in round {r}");
            assert!(!hit.contains(src), "class at {src:?} is both source and target in round {r}");
        }
        for (src, tgt) in &pairs {
            self.reduced.get_mut(src).unwrap().1 = Status::Source { round: r, partner: *tgt };
            self.reduced.get_mut(tgt).unwrap().1 = Status::Target { round: r, partner: *src };
        }
        self.rounds.push(RoundSummary { r, sources: pairs.len(), targets: hit.len() });
        self.round = r + 1;
        Ok(())
    }

    /// Pretty text chart: stems as columns, filtration rows from the top.
    /// `o` marks `β^b δ^d`, `x` marks `α β^b δ^d`, `T` a transfer marker
    /// alone and `#` a transfer marker sharing its spot with `δ^d`.
    pub fn chart(&self) -> String {
        let w = self.window;
        let mut out = String::new();
        let alive: BTreeMap<(i64, i64), SSClass> =
            self.reduced_classes().filter(|(_, s)| **s == Status::Alive).map(|(c, _)| ((c.stem(), c.s), *c)).collect();
        let top = alive.keys().map(|k| k.1).max().unwrap_or(0).max(w.filt_min).min(w.filt_max);
        for s in (w.filt_min..=top).rev() {
            let _ = write!(out, "{s:>3} |");
            for stem in w.stem_min..=w.stem_max {
                let marker = s == 0 && self.markers.contains_key(&stem);
                let glyph = match (alive.get(&(stem, s)), marker) {
                    (Some(_), true) => '#',
                    (None, true) => 'T',
                    (Some(c), false) if c.s % 2 == 1 => 'x',
                    (Some(_), false) => 'o',
                    (None, false) => '.',
                };
                out.push(glyph);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "    +{}", "-".repeat((w.stem_max - w.stem_min + 1) as usize));
        let _ = writeln!(out, "     stems {}..{}", w.stem_min, w.stem_max);
        out
    }

    pub fn to_json(&self) -> PageJson {
        PageJson {
            p: self.p,
            window: self.window,
            rounds: self.rounds.clone(),
            classes: self
                .reduced_classes()
                .map(|(c, st)| ClassJson { name: c.name(), stem: c.stem(), filtration: c.s, class: *c, status: *st })
                .collect(),
            transfer_markers: self.transfer_markers().map(|c| c.stem()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassJson {
    pub name: String,
    pub stem: i64,
    pub filtration: i64,
    pub class: SSClass,
    #[serde(flatten)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageJson {
    pub p: u64,
    pub window: Window,
    pub rounds: Vec<RoundSummary>,
    pub classes: Vec<ClassJson>,
    pub transfer_markers: Vec<i64>,
}

/// Runs both rounds of differentials, returning `E_∞` on the window.
pub fn run_differentials(page: &SSPage) -> Result<SSPage, HfpssError> {
    let mut page = page.clone();
    let p = page.p;
    let pi = p as i64;
    let (r1, r2) = lengths(p);
    let q = (pi - 1) * (pi - 1);
    page.apply_round(r1, |eps, b, d| {
        (eps == 0).then(|| ((1, b + p as u32 - 1, d - q), d.rem_euclid(pi) as u64))
    })?;
    page.apply_round(r2, |eps, b, d| {
        (eps == 1 && d.rem_euclid(pi) == pi - 1).then(|| ((0, b + q as u32 + 1, d - q * (pi - 1)), 1))
    })?;
    Ok(page)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bidegrees_at_p3() {
        let page = e2_page(3, Window::new((0, 12), (0, 4)));
        let at = |st, f| page.class_at(st, f).map(|(c, _)| c.name());
        assert_eq!(at(6, 0).as_deref(), Some("δ"));
        assert_eq!(at(3, 1).as_deref(), Some("α"));
        assert_eq!(at(10, 2).as_deref(), Some("β"));
        assert_eq!(at(0, 0).as_deref(), Some("1"));
        assert_eq!(page.transfer_markers().count(), 7);
    }

    #[test]
    fn first_differential_on_delta() {
        let page = run_differentials(&e2_page(3, Window::stems(3, -30, 30))).unwrap();
        let (_, st) = page.class_at(6, 0).unwrap();
        let Status::Source { round, partner } = st else { panic!("δ should support a differential") };
        assert_eq!(round, 5);
        let (target, _) = page.class_at(partner.0, partner.1).unwrap();
        assert_eq!(target.name(), "αβ^2δ^-3");
        // δ^3 and the unit survive.
        assert_eq!(page.class_at(18, 0).unwrap().1, Status::Alive);
        assert_eq!(page.class_at(0, 0).unwrap().1, Status::Alive);
    }

    #[test]
    fn second_differential_hits_beta_power() {
        let page = run_differentials(&e2_page(3, Window::stems(3, -10, 60))).unwrap();
        let beta5 = SSClass::reduced(3, 0, 5, 0);
        let (_, st) = page.class_at(beta5.stem(), beta5.s).unwrap();
        let Status::Target { round, partner } = st else { panic!("β^5 should be hit") };
        assert_eq!(round, 9);
        assert_eq!(page.class_at(partner.0, partner.1).unwrap().0.name(), "αδ^8");
    }

    #[test]
    fn rounds_conserve_classes() {
        let page = run_differentials(&e2_page(5, Window::stems(5, -40, 40))).unwrap();
        for r in page.rounds() {
            assert_eq!(r.sources, r.targets);
        }
        assert_eq!(page.round(), None);
    }

    #[test]
    fn chart_marks_unit_and_markers() {
        let page = run_differentials(&e2_page(3, Window::new((-2, 4), (0, 2)))).unwrap();
        let chart = page.chart();
        let bottom = chart.lines().find(|l| l.starts_with("  0 |")).unwrap();
        assert_eq!(bottom, "  0 |T.#.T.T");
    }

    fn positive_chart(page: &SSPage, lo: i64, len: i64) -> Vec<(i64, i64, String)> {
        let mut v: Vec<(i64, i64, String)> = page
            .surviving()
            .iter()
            .filter(|c| c.s > 0 && (lo..lo + len).contains(&c.stem()))
            .map(|c| (c.stem() - lo, c.s, if c.s % 2 == 1 { "x".to_string() } else { "o".to_string() }))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn einf_is_periodic_at_p3() {
        let page = run_differentials(&e2_page(3, Window::stems(3, 0, 143))).unwrap();
        let first = positive_chart(&page, 0, 72);
        assert!(!first.is_empty());
        assert_eq!(first, positive_chart(&page, 72, 72));
        assert_eq!(positive_chart(&page, 0, 18), positive_chart(&page, 18, 18));
    }
}
