use std::time::Instant;

use clap::Args;
use serde::Serialize;

use muorient_core::cpmod::endo_transfer_ideal_check;
use muorient_core::fgl::{extract_v1, extract_v2, extract_v2_eliminating, multivar_sum_coeff_check, n_series, FglError};
use muorient_core::hfpss::{evenness_report, tate_cross_check, Window};
use muorient_core::ring::{MultiPoly, PLocal, ResidueRing};
use muorient_core::symdecomp::{decompose_sym, slice_cells, tr_nm_witness};
use muorient_core::vmu::{
    e_theory_span_check, span_report, telescoping_check, tmf2_model, transfer_perturbation_suite,
};

use crate::commands::curve_law;
use crate::error::{resolve_seed, CliError};
use crate::output::{Output, Table};

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncation degree for the formal group law checks.
    #[arg(long, default_value_t = 10)]
    pub trunc: u32,
    /// Random samples for the perturbation checks.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Record wall-clock time per check. Makes the report non-reproducible.
    #[arg(long)]
    pub timings: bool,
    /// Run only the named checks (repeatable).
    #[arg(long = "only", value_name = "CHECK")]
    pub only: Vec<String>,
}

struct Config {
    seed: u64,
    trunc: u32,
    samples: usize,
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trunc: u32,
    pub samples: usize,
    pub passed: bool,
    pub failed: Vec<&'static str>,
    pub checks: Vec<CheckResult>,
}

type Outcome = Result<(bool, String), CliError>;
type Check = fn(&Config) -> Outcome;

const CHECKS: &[(&str, Check)] = &[
    ("e_theory_span", e_theory_span),
    ("endo_transfer_ideal", endo_transfer_ideal),
    ("formal_group_axioms", formal_group_axioms),
    ("hfpss_evenness", hfpss_evenness),
    ("multivar_congruence", multivar_congruence),
    ("slice_cells", slice_cell_split),
    ("span_telescoping", span_telescoping),
    ("sym_power_pattern", sym_power_pattern),
    ("tate_cross_check", tate_agreement),
    ("tmf2_span_rank", tmf2_span_rank),
    ("tmf2_three_series", tmf2_three_series),
    ("tmf2_v1_v2", tmf2_v1_v2),
    ("tr_nm_witness", tr_nm),
    ("transfer_perturbation", transfer_perturbation),
];

pub fn check_names() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|(n, _)| *n)
}

pub fn run_suite(args: &SuiteArgs) -> Result<Output, CliError> {
    if let Some(bad) = args.only.iter().find(|n| !check_names().any(|c| c == n.as_str())) {
        let known: Vec<_> = check_names().collect();
        return Err(CliError::Usage(format!("unknown check `{bad}`; known checks: {}", known.join(", "))));
    }
    let cfg = Config { seed: resolve_seed(args.seed)?, trunc: args.trunc, samples: args.samples };
    let mut checks = Vec::new();
    for &(name, check) in CHECKS {
        if !args.only.is_empty() && !args.only.iter().any(|n| n == name) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = match check(&cfg) {
            Ok(r) => r,
            Err(CliError::Check(detail)) => (false, detail),
            Err(e) => return Err(e),
        };
        let timing_ms = args.timings.then(|| start.elapsed().as_millis());
        checks.push(CheckResult { name, passed, detail, timing_ms });
    }
    checks.sort_by_key(|c| c.name);
    let failed: Vec<&'static str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if let Some(first) = checks.iter().find(|c| !c.passed) {
        eprintln!("first failure: {}: {}", first.name, first.detail);
    }
    let mut t = Table::new(&["check", "result", "detail"]);
    for c in &checks {
        t.row(vec![c.name.into(), if c.passed { "pass" } else { "FAIL" }.into(), c.detail.clone()]);
    }
    let report = SuiteReport {
        seed: cfg.seed,
        trunc: cfg.trunc,
        samples: cfg.samples,
        passed: failed.is_empty(),
        failed,
        checks,
    };
    let passed = report.passed;
    Ok(Output::new(&report, t.render())?.passed(passed))
}

fn tmf2_poly(s: &str) -> MultiPoly<PLocal> {
    let vars = muorient_core::fgl::WeierstrassCurve::tmf2(PLocal::new(3)).vars().clone();
    MultiPoly::parse(PLocal::new(3), vars, s).expect("fixed polynomial")
}

fn tmf2_three_series(cfg: &Config) -> Outcome {
    if cfg.trunc < 10 {
        return Err(FglError::TruncationTooSmall { needed: 10, got: cfg.trunc }.into());
    }
    let s = n_series(&curve_law("tmf2", 3, cfg.trunc)?, 3)?;
    let expected = [
        (1, "3"),
        (3, "8*l1 + 8*l2"),
        (5, "24*l1^2 - 48*l1*l2 + 24*l2^2"),
        (7, "72*l1^3 - 72*l1^2*l2 - 72*l1*l2^2 + 72*l2^3"),
        (9, "216*l1^4 - 608*l1^3*l2 + 784*l1^2*l2^2 - 608*l1*l2^3 + 216*l2^4"),
    ];
    for k in 0..10u32 {
        let want = expected.iter().find(|(d, _)| *d == k).map_or_else(|| tmf2_poly("0"), |(_, c)| tmf2_poly(c));
        let got = s.coeff_exps(&[k]);
        if got != want {
            return Ok((false, format!("coefficient of x^{k} is {got}, expected {want}")));
        }
    }
    Ok((true, "coefficients of x through x^9 match exactly".into()))
}

fn tmf2_v1_v2(cfg: &Config) -> Outcome {
    let law = curve_law("tmf2", 3, cfg.trunc)?;
    let v1 = extract_v1(&law, 3)?;
    let f3 = ResidueRing::prime_field(3);
    let poly = |s: &str| MultiPoly::parse(f3, v1.vars().clone(), s).expect("fixed polynomial");
    if v1 != poly("-l1 - l2") {
        return Ok((false, format!("v1 = {v1}, expected -l1 - l2 mod 3")));
    }
    let a = extract_v2(&law, 3)?;
    let b = extract_v2_eliminating(&law, 3, Some("l1"))?;
    let passed = a.v2 == poly("l1^4") && b.v2 == poly("l2^4");
    Ok((passed, format!("v1 = {v1}; v2 = {} = {} mod (3, v1), expected l1^4 = l2^4", a.v2, b.v2)))
}

fn sym_power_pattern(_: &Config) -> Outcome {
    let mut count = 0;
    for (p, kmax) in [(3, 40), (5, 20), (7, 10)] {
        for k in 0..=kmax {
            decompose_sym(p, k)?;
            count += 1;
        }
    }
    Ok((true, format!("{count} symmetric powers follow the three-case pattern")))
}

fn tr_nm(_: &Config) -> Outcome {
    for p in [2, 3, 5] {
        tr_nm_witness(p)?;
    }
    Ok((true, "witness psi found and re-verified for p = 2, 3, 5".into()))
}

fn slice_cell_split(_: &Config) -> Outcome {
    for n in 0..=20 {
        let c = slice_cells(3, n)?;
        let free = decompose_sym(3, n)?.free;
        if c.free_count != free {
            return Ok((false, format!("n = {n}: {} free cells but Sym^{n} has {free} free summands", c.free_count)));
        }
    }
    Ok((true, "p = 3, n = 0..20".into()))
}

fn endo_transfer_ideal(cfg: &Config) -> Outcome {
    for p in [2, 3, 5] {
        let r = endo_transfer_ideal_check(p, cfg.seed)?;
        if !(r.ideal_is_two_sided && r.ideal_equals_transfer_image) {
            return Ok((false, format!("p = {p}: non-units do not form the transfer ideal")));
        }
    }
    Ok((true, "non-units equal the transfer ideal for p = 2, 3, 5".into()))
}

fn tmf2_span_rank(_: &Config) -> Outcome {
    let r = span_report(&tmf2_model())?;
    let mut values: Vec<&str> = r.classes.iter().map(|c| c.value.as_str()).collect();
    values.sort_unstable();
    let det = r.det_mod_p.map_or("undefined".to_string(), |d| d.to_string());
    let detail = format!("rank {}, det {det} mod 3, classes {}", r.rank, values.join(", "));
    let unit_det = matches!(r.det_mod_p, Some(d) if d % 3 != 0);
    Ok((r.rank == 2 && unit_det && values == ["-l2", "l1"], detail))
}

fn span_telescoping(_: &Config) -> Outcome {
    let r = telescoping_check(&tmf2_model())?;
    Ok((
        r.partial_sum_identity && r.full_orbit_sum_zero,
        format!("sum of classes {} = closing difference {}", r.sum_of_classes, r.closing_difference),
    ))
}

fn e_theory_span(cfg: &Config) -> Outcome {
    let mut parts = Vec::new();
    for p in [3, 5, 7] {
        let r = e_theory_span_check(p, cfg.samples, cfg.seed)?;
        if r.rank != p as usize - 1 || r.min_rank_after_perturbation != r.rank {
            return Ok((false, format!("p = {p}: rank {} and {} after perturbation", r.rank, r.min_rank_after_perturbation)));
        }
        parts.push(format!("p = {p}: rank {} over {} {} perturbations", r.rank, r.perturbations, r.perturbation_mode));
    }
    Ok((true, parts.join("; ")))
}

fn transfer_perturbation(cfg: &Config) -> Outcome {
    let r = transfer_perturbation_suite(&tmf2_model(), cfg.samples, cfg.seed)?;
    Ok((true, format!("{} random and {} F_3-linear x, rank stays {}", r.random_samples, r.linear_samples, r.rank)))
}

fn multivar_congruence(cfg: &Config) -> Outcome {
    for law in ["additive", "multiplicative", "tmf2"] {
        let r = multivar_sum_coeff_check(&curve_law(law, 3, cfg.trunc.max(4))?, 3)?;
        if !(r.cyclic_invariant && r.congruent_mod_p) {
            return Ok((false, format!("{law}: difference {} is not divisible by 3", r.difference)));
        }
    }
    Ok((true, "additive, multiplicative and tmf2 at p = 3".into()))
}

fn formal_group_axioms(cfg: &Config) -> Outcome {
    for law in ["additive", "multiplicative", "tmf2"] {
        curve_law(law, 3, cfg.trunc.max(4))?.check_axioms()?;
    }
    Ok((true, "unit, commutativity and associativity hold to the truncation".into()))
}

fn hfpss_evenness(_: &Config) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (p, lo, hi) in [(3, -80, 80), (5, -60, 60)] {
        let r = evenness_report(p, Window::stems(p, lo, hi))?;
        passed &= r.passed();
        let e2: Vec<&str> = r.e2_stem_minus_one.iter().map(|c| c.name.as_str()).collect();
        parts.push(format!(
            "p = {p}: E2 stem -1 {}; E_inf positive filtration in stems 0, -1, -2 {}",
            if e2.is_empty() { "empty".into() } else { e2.join(", ") },
            if r.einf_clean { "empty" } else { "nonempty" }
        ));
    }
    Ok((passed, parts.join("; ")))
}

fn tate_agreement(_: &Config) -> Outcome {
    for t in (-12..=12).step_by(2) {
        tate_cross_check(3, t, 12)?;
    }
    Ok((true, "p = 3, t = -12..12, stable between cutoffs 12 and 14".into()))
}
