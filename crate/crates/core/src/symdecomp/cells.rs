use serde::{Deserialize, Serialize};

use super::{decompose_sym, SymError};
use crate::ring::binomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecialCell {
    /// `S^{2m rho}`.
    RegularSphere { m: u64 },
    /// `S^{2m rho + 1 + spoke}`.
    SpokeCell { m: u64 },
}

impl SpecialCell {
    pub fn label(&self) -> String {
        match *self {
            SpecialCell::RegularSphere { m: 0 } => "S^0".into(),
            SpecialCell::RegularSphere { m } => format!("S^{{{}ρ}}", 2 * m),
            SpecialCell::SpokeCell { m: 0 } => "S^{1+⅄}".into(),
            SpecialCell::SpokeCell { m } => format!("S^{{{}ρ+1+⅄}}", 2 * m),
        }
    }

    /// Rank of the reduced homology of the cell.
    pub fn homology_rank(&self, p: u64) -> u64 {
        match self {
            SpecialCell::RegularSphere { .. } => 1,
            SpecialCell::SpokeCell { .. } => p - 1,
        }
    }
}

/// Cells in the `n`-th filtration quotient of the `mu_p` projective space:
/// at most one special cell and `free_count` induced cells `(C_p)_+ ⊗ S^{2n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceCellList {
    pub p: u64,
    pub n: u32,
    pub special: Option<SpecialCell>,
    pub special_label: String,
    pub free_count: usize,
    pub free_label: String,
    pub homology_rank: u64,
}

pub fn slice_cells(p: u64, n: u32) -> Result<SliceCellList, SymError> {
    let nn = n as u64;
    let special = match nn % p {
        0 => Some(SpecialCell::RegularSphere { m: nn / p }),
        1 => Some(SpecialCell::SpokeCell { m: (nn - 1) / p }),
        _ => None,
    };
    let decomposition = decompose_sym(p, n)?;
    let rank = binomial(nn + p - 2, nn);
    let special_rank = special.map_or(0, |c| c.homology_rank(p));
    if special_rank + p * decomposition.free as u64 != rank {
        return Err(SymError::PatternViolation {
            p,
            k: n,
            detail: format!("cells account for rank {} of {rank}", special_rank + p * decomposition.free as u64),
        });
    }
    Ok(SliceCellList {
        p,
        n,
        special,
        special_label: special.map_or_else(|| "none".to_string(), |c| c.label()),
        free_count: decomposition.free,
        free_label: format!("(C_{p})_+ ⊗ S^{}", 2 * n),
        homology_rank: rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_cells_at_three() {
        let c = slice_cells(3, 1).unwrap();
        assert_eq!(c.special, Some(SpecialCell::SpokeCell { m: 0 }));
        assert_eq!((c.special_label.as_str(), c.free_count), ("S^{1+⅄}", 0));
        let c = slice_cells(3, 0).unwrap();
        assert_eq!((c.special_label.as_str(), c.free_count), ("S^0", 0));
        let c = slice_cells(3, 2).unwrap();
        assert_eq!((c.special, c.free_count), (None, 1));
        let c = slice_cells(3, 7).unwrap();
        assert_eq!(c.special_label, "S^{4ρ+1+⅄}");
    }
}
