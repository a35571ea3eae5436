//! Exact algebra for cyclic-group actions at a prime: coefficient rings,
//! `C_p`-modules, symmetric powers of the reduced regular representation,
//! formal group laws, span classes of `v1`, and a homotopy fixed point
//! spectral sequence engine.

pub mod cpmod;
pub mod fgl;
pub mod hfpss;
pub mod linalg;
pub mod ring;
pub mod symdecomp;
pub mod vmu;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Ring(#[from] ring::RingError),
    #[error(transparent)]
    Module(#[from] cpmod::CpError),
    #[error(transparent)]
    Sym(#[from] symdecomp::SymError),
    #[error(transparent)]
    Fgl(#[from] fgl::FglError),
    #[error(transparent)]
    Vmu(#[from] vmu::VmuError),
    #[error(transparent)]
    Hfpss(#[from] hfpss::HfpssError),
}

impl Error {
    /// True for failed mathematical checks, as opposed to bad input.
    pub fn is_check_failure(&self) -> bool {
        use cpmod::CpError;
        matches!(
            self,
            Error::Module(CpError::CheckFailed { .. })
                | Error::Sym(symdecomp::SymError::PatternViolation { .. } | symdecomp::SymError::NoWitness(_))
                | Error::Fgl(fgl::FglError::CheckFailed { .. } | fgl::FglError::AxiomViolation { .. })
                | Error::Vmu(vmu::VmuError::CheckFailed { .. })
                | Error::Hfpss(
                    hfpss::HfpssError::EvennessViolation { .. }
                        | hfpss::HfpssError::DimensionMismatch { .. }
                        | hfpss::HfpssError::NotStabilized { .. }
                )
        )
    }
}
