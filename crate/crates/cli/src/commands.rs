use serde::Serialize;

use muorient_core::cpmod::{endo_transfer_ideal_check, JordanType};
use muorient_core::fgl::{
    curve_formal_group, extract_v1, extract_v2_eliminating, multivar_sum_coeff_check, n_series, FormalGroupLaw,
    MultivarReport, V2Method, WeierstrassCurve,
};
use muorient_core::hfpss::{e2_page, evenness_report, run_differentials, tate_cross_check, PageJson, Window};
use muorient_core::ring::{PLocal, VarSet};
use muorient_core::symdecomp::{decompose_sym, slice_cells as cells_of, tr_nm_witness, SliceCellList, SymDecomposition};
use muorient_core::vmu::{e_theory_span_check, span_report, telescoping_check, tmf2_model, trivial_model, SpanReport, TelescopeReport};

use crate::error::CliError;
use crate::output::{Output, Table};

pub fn jordan_label(j: &JordanType) -> String {
    if j.counts.is_empty() {
        return "0".into();
    }
    j.counts.iter().rev().map(|(size, count)| format!("J{size}^{count}")).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct SymReport {
    p: u64,
    k_min: u32,
    k_max: u32,
    results: Vec<SymDecomposition>,
}

pub fn sym_decompose(p: u64, (lo, hi): (u32, u32)) -> Result<Output, CliError> {
    let results = (lo..=hi).map(|k| decompose_sym(p, k)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["k", "dim", "trivial", "rhobar", "free", "jordan"]);
    for r in &results {
        t.row(vec![
            r.k.to_string(),
            r.dim.to_string(),
            r.trivial.to_string(),
            r.rhobar.to_string(),
            r.free.to_string(),
            jordan_label(&r.jordan),
        ]);
    }
    Output::new(&SymReport { p, k_min: lo, k_max: hi, results }, t.render())
}

#[derive(Serialize)]
struct CellsReport {
    p: u64,
    n_min: u32,
    n_max: u32,
    cells: Vec<SliceCellList>,
}

pub fn slice_cells(p: u64, (lo, hi): (u32, u32)) -> Result<Output, CliError> {
    let cells = (lo..=hi).map(|n| cells_of(p, n)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["n", "special", "free", "homology rank"]);
    for c in &cells {
        t.row(vec![
            c.n.to_string(),
            if c.special.is_some() { c.special_label.clone() } else { "-".into() },
            format!("{} x {}", c.free_count, c.free_label),
            c.homology_rank.to_string(),
        ]);
    }
    Output::new(&CellsReport { p, n_min: lo, n_max: hi, cells }, t.render())
}

#[derive(Serialize)]
struct TrNmReport {
    p: u64,
    identity: &'static str,
    transfer_of_e1p: String,
    quotient: String,
    norm: String,
    psi: String,
}

pub fn tr_nm(p: u64) -> Result<Output, CliError> {
    let w = tr_nm_witness(p)?;
    let report = TrNmReport {
        p,
        identity: "Nm - Tr(e1^p)/p = Tr(psi)",
        transfer_of_e1p: w.transfer_of_e1p.to_string(),
        quotient: w.quotient.to_string(),
        norm: w.norm.to_string(),
        psi: w.psi.to_string(),
    };
    let table = format!(
        "Tr(e1^{p})     = {}\nTr(e1^{p})/{p}   = {}\nNm           = {}\npsi          = {}",
        report.transfer_of_e1p, report.quotient, report.norm, report.psi
    );
    Output::new(&report, table)
}

/// The formal group law named by `--curve`.
pub fn curve_law(curve: &str, p: u64, trunc: u32) -> Result<FormalGroupLaw<PLocal>, CliError> {
    let ring = PLocal::new(p);
    let json = match curve {
        "tmf2" => return Ok(curve_formal_group(&WeierstrassCurve::tmf2(ring), trunc)?),
        "additive" => return Ok(FormalGroupLaw::additive(ring, VarSet::new(&[]), trunc)),
        "multiplicative" => return Ok(FormalGroupLaw::multiplicative(ring, VarSet::new(&[]), trunc)),
        s if s.starts_with('@') => {
            std::fs::read_to_string(&s[1..]).map_err(|e| CliError::Usage(format!("reading curve file {}: {e}", &s[1..])))?
        }
        s if s.trim_start().starts_with('{') => s.to_string(),
        s => {
            return Err(CliError::Usage(format!(
                "unknown curve `{s}`; use tmf2, additive, multiplicative, a JSON object or @file"
            )))
        }
    };
    let c = WeierstrassCurve::from_json(ring, &json)?;
    Ok(curve_formal_group(&c, trunc)?)
}

fn curve_name(curve: &str) -> String {
    match curve {
        "tmf2" | "additive" | "multiplicative" => curve.into(),
        s if s.starts_with('@') => s[1..].into(),
        _ => "custom".into(),
    }
}

#[derive(Serialize)]
struct Coefficient {
    degree: u32,
    coefficient: String,
}

#[derive(Serialize)]
struct SeriesReport {
    curve: String,
    p: u64,
    n: u32,
    trunc: u32,
    series: String,
    coefficients: Vec<Coefficient>,
}

pub fn p_series(curve: &str, p: u64, trunc: u32, n: u32) -> Result<Output, CliError> {
    let law = curve_law(curve, p, trunc)?;
    let s = n_series(&law, n)?;
    let coefficients: Vec<Coefficient> =
        (1..trunc).map(|k| Coefficient { degree: k, coefficient: s.coeff_exps(&[k]).to_string() }).collect();
    let mut t = Table::new(&["degree", "coefficient"]);
    for c in coefficients.iter().filter(|c| c.coefficient != "0") {
        t.row(vec![format!("x^{}", c.degree), c.coefficient.clone()]);
    }
    let report = SeriesReport { curve: curve_name(curve), p, n, trunc, series: s.to_string(), coefficients };
    Output::new(&report, t.render())
}

#[derive(Serialize)]
struct InvariantsReport {
    curve: String,
    p: u64,
    trunc: u32,
    v1: String,
    raw: String,
    v2: String,
    #[serde(flatten)]
    method: V2Method,
}

pub fn invariants(curve: &str, p: u64, trunc: u32, eliminate: Option<&str>) -> Result<Output, CliError> {
    let law = curve_law(curve, p, trunc)?;
    // v1 first, so a truncation that only suffices for v1 still reports it.
    extract_v1(&law, p)?;
    let r = extract_v2_eliminating(&law, p, eliminate)?;
    let how = match &r.method {
        V2Method::Substitution { eliminated } => format!("substituting for {eliminated}"),
        V2Method::Echelon => "echelon normal form".into(),
    };
    let table = format!("v1 = {} (mod {p})\nv2 = {} (mod {p}, v1), {how}\nx^{} coefficient mod {p}: {}", r.v1, r.v2, p * p, r.raw);
    let report = InvariantsReport {
        curve: curve_name(curve),
        p,
        trunc,
        v1: r.v1.to_string(),
        raw: r.raw.to_string(),
        v2: r.v2.to_string(),
        method: r.method,
    };
    Output::new(&report, table)
}

#[derive(Serialize)]
struct MultivarOut {
    curve: String,
    #[serde(flatten)]
    report: MultivarReport,
}

pub fn multivar(curve: &str, p: u64, trunc: u32) -> Result<Output, CliError> {
    let law = curve_law(curve, p, trunc)?;
    let report = multivar_sum_coeff_check(&law, p)?;
    let passed = report.cyclic_invariant && report.congruent_mod_p;
    let mut t = Table::new(&["orbit", "size", "coefficient", "contribution"]);
    for o in &report.orbits {
        t.row(vec![o.representative.clone(), o.size.to_string(), o.coefficient.clone(), o.contribution.clone()]);
    }
    let table = format!(
        "coefficient of x1...x{p}: {}\ncoefficient of x^{p} in [{p}](x): {}\ndifference: {}\n\n{}",
        report.product_coefficient,
        report.p_series_coefficient,
        report.difference,
        t.render()
    );
    Ok(Output::new(&MultivarOut { curve: curve_name(curve), report }, table)?.passed(passed))
}

#[derive(Serialize)]
struct ModelSpan {
    span: SpanReport,
    telescope: TelescopeReport,
}

pub fn v1_span_model(tmf2: bool, p: u64) -> Result<Output, CliError> {
    if p != 3 {
        return Err(CliError::Usage(format!("the tmf2 and trivial models live at p = 3, got p = {p}")));
    }
    let model = if tmf2 { tmf2_model() } else { trivial_model() };
    let span = span_report(&model)?;
    let telescope = telescoping_check(&model)?;
    let mut t = Table::new(&["class", "value"]);
    for c in &span.classes {
        t.row(vec![c.formula.clone(), c.value.clone()]);
    }
    let det = span.det_mod_p.map_or("-".to_string(), |d| d.to_string());
    let table = format!(
        "model {} at p = {}, v1 = {}\n{}\nrank {} det mod p {}\nsum of classes {} (closing difference {})",
        span.model,
        span.p,
        span.v1,
        t.render(),
        span.rank,
        det,
        telescope.sum_of_classes,
        telescope.closing_difference
    );
    let passed = telescope.partial_sum_identity && telescope.full_orbit_sum_zero;
    Ok(Output::new(&ModelSpan { span, telescope }, table)?.passed(passed))
}

pub fn v1_span_etheory(p: u64, samples: usize, seed: u64) -> Result<Output, CliError> {
    let r = e_theory_span_check(p, samples, seed)?;
    let table = format!(
        "E-theory model at p = {p}\nclasses: {}\nrank {} (expected {})\n{} perturbations ({}), minimum rank after {}",
        r.classes.join(", "),
        r.rank,
        p - 1,
        r.perturbations,
        r.perturbation_mode,
        r.min_rank_after_perturbation
    );
    let passed = r.rank == p as usize - 1 && r.min_rank_after_perturbation == r.rank;
    Ok(Output::new(&r, table)?.passed(passed))
}

pub fn hfpss_run(p: u64, (lo, hi): (i64, i64)) -> Result<Output, CliError> {
    let window = Window::stems(p, lo, hi);
    let einf = run_differentials(&e2_page(p, window))?;
    let json: PageJson = einf.to_json();
    let mut t = Table::new(&["class", "stem", "filtration"]);
    for c in einf.surviving() {
        t.row(vec![c.name(), c.stem().to_string(), c.s.to_string()]);
    }
    Ok(Output::new(&json, t.render())?.with_chart(einf.chart()))
}

pub fn hfpss_evenness(p: u64, (lo, hi): (i64, i64)) -> Result<Output, CliError> {
    let r = evenness_report(p, Window::stems(p, lo, hi))?;
    let names = |v: &[muorient_core::hfpss::ClassRef]| {
        if v.is_empty() {
            "none".to_string()
        } else {
            v.iter().map(|c| format!("{} ({}, {})", c.name, c.stem, c.filtration)).collect::<Vec<_>>().join(", ")
        }
    };
    let table = format!(
        "p = {p}, stems {lo}..{hi}, period {}\nE2 reduced classes in stem -1: {}\nE_inf positive filtration in stems 0, -1, -2 mod period: {}",
        r.period,
        names(&r.e2_stem_minus_one),
        names(&r.einf_positive_filtration)
    );
    let passed = r.passed();
    Ok(Output::new(&r, table)?.passed(passed))
}

pub fn hfpss_tate(p: u64, t: i64, cutoff: u32) -> Result<Output, CliError> {
    let r = tate_cross_check(p, t, cutoff)?;
    let table = format!(
        "t = {t}, Sym^{}: Tate (even, odd) = ({}, {}), monomials = ({}, {})",
        r.sym_degree, r.tate_even, r.tate_odd, r.monomials_even, r.monomials_odd
    );
    Output::new(&r, table)
}

pub fn endo_check(p: u64, seed: u64) -> Result<Output, CliError> {
    let r = endo_transfer_ideal_check(p, seed)?;
    let table = format!(
        "p = {p}: {} commuting endomorphisms, {} non-units\ntwo-sided ideal: {}\nequals transfer image: {}\nperturbations: {} ({})",
        r.commutant_size, r.nonunit_count, r.ideal_is_two_sided, r.ideal_equals_transfer_image, r.perturbation_pairs, r.perturbation_mode
    );
    let passed = r.ideal_is_two_sided && r.ideal_equals_transfer_image;
    Ok(Output::new(&r, table)?.passed(passed))
}
