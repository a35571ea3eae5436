use std::fmt;

use muorient_core::cpmod::CpError;
use muorient_core::fgl::FglError;
use muorient_core::hfpss::HfpssError;
use muorient_core::ring::RingError;
use muorient_core::symdecomp::SymError;
use muorient_core::vmu::{VmuError, DEFAULT_SEED};
use muorient_core::Error;

pub const SEED_ENV: &str = "MU_ORIENT_SEED";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input (exit 2).
    Usage(String),
    /// A mathematical check did not hold (exit 1).
    Check(String),
    /// Something that should not happen (exit 3).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Check(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

fn ring_is_input(e: &RingError) -> bool {
    matches!(e, RingError::Parse { .. } | RingError::UnknownVariable(_) | RingError::NotPLocal { .. })
}

fn is_usage(e: &Error) -> bool {
    match e {
        Error::Ring(r) => ring_is_input(r),
        Error::Module(m) => matches!(m, CpError::Unsupported(_)),
        Error::Sym(SymError::Ring(r)) => ring_is_input(r),
        Error::Sym(_) => false,
        Error::Fgl(f) => match f {
            FglError::TruncationTooSmall { .. } | FglError::CurveSpec(_) | FglError::NotHomogeneous(_) => true,
            FglError::Ring(r) => ring_is_input(r),
            _ => false,
        },
        Error::Vmu(v) => matches!(v, VmuError::Unsupported(_) | VmuError::InvalidModel(_)),
        Error::Hfpss(h) => matches!(h, HfpssError::WindowTooSmall(_) | HfpssError::Unsupported(_)),
    }
}

fn guidance(e: &Error) -> Option<String> {
    match e {
        Error::Fgl(FglError::TruncationTooSmall { needed, .. }) => {
            Some(format!("rerun with --trunc {needed} or larger"))
        }
        Error::Hfpss(HfpssError::WindowTooSmall(_)) => Some("widen --stems so that it contains -2:0".into()),
        _ => None,
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        let e: Error = e.into();
        let mut msg = e.to_string();
        if let Some(g) = guidance(&e) {
            msg = format!("{msg}; {g}");
        }
        if e.is_check_failure() {
            CliError::Check(msg)
        } else if is_usage(&e) {
            CliError::Usage(msg)
        } else {
            CliError::Internal(msg)
        }
    }
}

/// The `--seed` flag, then `MU_ORIENT_SEED`, then the library default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_seed(&v).ok_or_else(|| CliError::Usage(format!("{SEED_ENV}={v} is not an integer seed"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}
