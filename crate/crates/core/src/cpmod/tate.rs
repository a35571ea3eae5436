use serde::{Deserialize, Serialize};

use super::{CpError, CpModule};
use crate::linalg::Matrix;
use crate::ring::CoeffRing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// One cyclic summand `R/p^e` of a Tate group. `exponent` is `None` when
/// the summand is not killed by any power of `p` visible in the ring, which
/// over `Z/p^N` means "at least `p^N`".
#[derive(Debug, Clone, PartialEq)]
pub struct TateSummand<R: CoeffRing> {
    pub exponent: Option<u32>,
    pub representative: Vec<R::Elem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TateGroup<R: CoeffRing> {
    pub parity: Parity,
    pub summands: Vec<TateSummand<R>>,
}

impl<R: CoeffRing> TateGroup<R> {
    /// Number of cyclic summands, i.e. the `F_p`-dimension of the group
    /// modulo `p`.
    pub fn dim(&self) -> usize {
        self.summands.len()
    }

    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn exponents(&self) -> Vec<Option<u32>> {
        self.summands.iter().map(|s| s.exponent).collect()
    }
}

/// Tate cohomology of `C_p` with coefficients in `m`: the even group is
/// `ker(gamma - 1) / im(Tr)` and the odd group `ker(Tr) / im(gamma - 1)`.
///
/// Kernels are saturated sublattices, so over `Z/p^N` the answer is that of
/// the underlying lattice rather than of the finite module. That lattice can
/// only be recovered when the reduction has not lost information: the row
/// `(3, 9)` has lattice kernel spanned by `(-3, 1)`, but its reduction mod 9
/// suggests `(0, 1)`. When the image of the second operator does not land in
/// the computed kernel the result is `PrecisionLoss`; over `Z_(p)` it never is.
pub fn tate_cohomology<R: CoeffRing>(m: &CpModule<R>, parity: Parity) -> Result<TateGroup<R>, CpError> {
    let (kill, span) = match parity {
        Parity::Even => (m.n_operator(), m.transfer_operator()),
        Parity::Odd => (m.transfer_operator(), m.n_operator()),
    };
    Ok(TateGroup { parity, summands: subquotient(&kill.kernel(), &span)? })
}

/// Cyclic decomposition of `span(k) / span(b)`, where the columns of `k`
/// form a saturated basis containing the columns of `b`.
fn subquotient<R: CoeffRing>(k: &Matrix<R>, b: &Matrix<R>) -> Result<Vec<TateSummand<R>>, CpError> {
    let ring = k.ring().clone();
    if k.cols() == 0 {
        return Ok(Vec::new());
    }
    let ks = k.smith();
    let coords: Vec<Vec<R::Elem>> = b
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            ks.solve(col).ok_or_else(|| {
                CpError::PrecisionLoss(format!("column {j} of the image is outside the kernel over {}", ring.name()))
            })
        })
        .collect::<Result<_, _>>()?;
    let c = if coords.is_empty() {
        Matrix::zeros(ring.clone(), k.cols(), 0)
    } else {
        Matrix::from_columns(ring.clone(), k.cols(), &coords)
    };
    let cs = c.smith();
    let mut out = Vec::new();
    for t in 0..k.cols() {
        let exponent = if t < cs.rank {
            match ring.valuation(&cs.diag[t]) {
                Some(0) => continue,
                v => v,
            }
        } else {
            None
        };
        let representative = k.mul_vec(&cs.p_inv.column(t));
        out.push(TateSummand { exponent, representative });
    }
    Ok(out)
}
