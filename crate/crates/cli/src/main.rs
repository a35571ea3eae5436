mod commands;
mod error;
mod output;
mod verify;

use std::io::{self, Write};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;
use output::{Format, Output};

#[derive(Debug, Parser)]
#[command(name = "muorient", version, about = "Exact checks for C_p representations, formal group laws and fixed point spectral sequences")]
struct Cli {
    /// Output format. `chart` is only meaningful for `hfpss run`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json, visible_alias = "report")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose Sym^k of the reduced regular representation over F_p.
    SymDecompose {
        #[arg(long, value_parser = parse_prime)]
        p: u64,
        /// Degree range `a..b` (inclusive) or a single degree.
        #[arg(long, value_parser = parse_range, default_value = "0..10")]
        k: (u32, u32),
    },
    /// List the cells of the filtration quotients of the mu_p projective space.
    SliceCells {
        #[arg(long, value_parser = parse_prime)]
        p: u64,
        #[arg(long, value_parser = parse_range, default_value = "0..20")]
        n: (u32, u32),
    },
    /// Divisibility of Tr(e1^p) by p, with an explicit transfer witness.
    TrNm {
        #[arg(long, value_parser = parse_prime)]
        p: u64,
    },
    /// Formal group law computations.
    #[command(subcommand)]
    Fgl(FglCommand),
    /// Span classes of v1 in an oriented ring model.
    V1Span(V1SpanArgs),
    /// Homotopy fixed point spectral sequence.
    #[command(subcommand)]
    Hfpss(HfpssCommand),
    /// Endomorphisms of the regular representation modulo the transfer ideal.
    EndoCheck {
        #[arg(long, value_parser = parse_prime)]
        p: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every check and print an aggregate report.
    VerifyPaper(verify::SuiteArgs),
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// `tmf2`, `additive`, `multiplicative`, a JSON curve, or `@path` to one.
    #[arg(long, default_value = "tmf2")]
    curve: String,
    #[arg(long, value_parser = parse_prime, default_value_t = 3)]
    p: u64,
    #[arg(long, default_value_t = 10)]
    trunc: u32,
}

#[derive(Debug, Subcommand)]
enum FglCommand {
    /// The n-series [n](x) of the curve's formal group law.
    PSeries {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// v1 modulo p and v2 modulo (p, v1).
    Invariants {
        #[command(flatten)]
        curve: CurveArgs,
        /// Variable to eliminate using v1 = 0.
        #[arg(long)]
        eliminate: Option<String>,
    },
    /// Coefficient of x1...xp in the p-fold sum against [p](x).
    Multivar {
        #[command(flatten)]
        curve: CurveArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Tmf2,
    Trivial,
    Etheory,
}

#[derive(Debug, Args)]
struct V1SpanArgs {
    #[arg(long, value_enum, default_value_t = Model::Tmf2)]
    model: Model,
    #[arg(long, value_parser = parse_prime, default_value_t = 3)]
    p: u64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum HfpssCommand {
    /// Run the differentials on a stem window and print E_infinity.
    Run {
        #[arg(long, value_parser = parse_prime)]
        p: u64,
        /// Stem range `a:b`, inclusive.
        #[arg(long, value_parser = parse_stems, allow_hyphen_values = true, default_value = "-40:40")]
        stems: (i64, i64),
    },
    /// Evenness of stems 0, -1 and -2.
    Evenness {
        #[arg(long, value_parser = parse_prime)]
        p: u64,
        #[arg(long, value_parser = parse_stems, allow_hyphen_values = true, default_value = "-80:80")]
        stems: (i64, i64),
    },
    /// Compare Tate cohomology of symmetric powers with the E_2 monomials.
    Tate {
        #[arg(long, value_parser = parse_prime)]
        p: u64,
        #[arg(long, allow_negative_numbers = true)]
        t: i64,
        #[arg(long, default_value_t = 12)]
        cutoff: u32,
    },
}

fn parse_prime(s: &str) -> Result<u64, String> {
    let p: u64 = s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if !muorient_core::ring::is_prime(p) {
        return Err("p must be prime".into());
    }
    Ok(p)
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let bad = || format!("expected `a..b` or a single number, got `{s}`");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim_start_matches('=').trim().parse().map_err(|_| bad())?),
        None => {
            let k = s.trim().parse().map_err(|_| bad())?;
            (k, k)
        }
    };
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn parse_stems(s: &str) -> Result<(i64, i64), String> {
    let bad = || format!("expected `a:b`, got `{s}`");
    // Split on the colon rather than a hyphen so that negative bounds parse.
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: i64 = a.trim().parse().map_err(|_| bad())?;
    let hi: i64 = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(format!("empty stem range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::SymDecompose { p, k } => commands::sym_decompose(*p, *k),
        Command::SliceCells { p, n } => commands::slice_cells(*p, *n),
        Command::TrNm { p } => commands::tr_nm(*p),
        Command::Fgl(FglCommand::PSeries { curve, n }) => commands::p_series(&curve.curve, curve.p, curve.trunc, *n),
        Command::Fgl(FglCommand::Invariants { curve, eliminate }) => {
            commands::invariants(&curve.curve, curve.p, curve.trunc, eliminate.as_deref())
        }
        Command::Fgl(FglCommand::Multivar { curve }) => commands::multivar(&curve.curve, curve.p, curve.trunc),
        Command::V1Span(a) => match a.model {
            Model::Tmf2 | Model::Trivial => commands::v1_span_model(a.model == Model::Tmf2, a.p),
            Model::Etheory => commands::v1_span_etheory(a.p, a.samples, error::resolve_seed(a.seed)?),
        },
        Command::Hfpss(HfpssCommand::Run { p, stems }) => commands::hfpss_run(*p, *stems),
        Command::Hfpss(HfpssCommand::Evenness { p, stems }) => commands::hfpss_evenness(*p, *stems),
        Command::Hfpss(HfpssCommand::Tate { p, t, cutoff }) => commands::hfpss_tate(*p, *t, *cutoff),
        Command::EndoCheck { p, seed } => commands::endo_check(*p, error::resolve_seed(*seed)?),
        Command::VerifyPaper(args) => verify::run_suite(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = panic::catch_unwind(AssertUnwindSafe(|| run(&cli).and_then(|out| out.render(cli.format))));
    match result {
        Ok(Ok((text, passed))) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(io::stdout().lock(), "{text}");
            ExitCode::from(if passed { 0 } else { 1 })
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => {
            eprintln!("error: internal assertion failed; this is a bug");
            ExitCode::from(3)
        }
    }
}
