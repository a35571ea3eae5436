use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{standard_module, CpError, ModuleKind};
use crate::linalg::{Echelon, FpMatrix};
use crate::ring::ResidueRing;

const SAMPLED_PAIRS: usize = 4000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoReport {
    pub p: u64,
    pub commutant_size: u64,
    pub nonunit_count: u64,
    pub ideal_is_two_sided: bool,
    pub ideal_equals_transfer_image: bool,
    pub perturbation_mode: String,
    pub perturbation_pairs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn to_matrix(p: u32, n: usize, v: &[u32]) -> FpMatrix {
    let rows: Vec<Vec<i64>> = (0..n).map(|i| v[i * n..(i + 1) * n].iter().map(|&x| x as i64).collect()).collect();
    FpMatrix::from_rows(p, &rows)
}

fn flatten(m: &FpMatrix) -> Vec<u32> {
    m.entries().to_vec()
}

fn combination(p: u32, len: usize, basis: &[Vec<u32>], coeffs: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != 0 {
            for (x, &y) in out.iter_mut().zip(b) {
                *x = (*x + c * y) % p;
            }
        }
    }
    out
}

/// Every coefficient vector in `F_p^m`, in little-endian counting order.
fn all_coefficients(p: u32, m: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(m as u32);
    (0..total).map(move |mut k| {
        (0..m)
            .map(|_| {
                let d = (k % p as u64) as u32;
                k /= p as u64;
                d
            })
            .collect()
    })
}

fn same_span(p: u32, cols: usize, a: &[Vec<u32>], b: &[Vec<u32>]) -> Result<(), Vec<u32>> {
    let mut ea = Echelon::new(p, cols);
    a.iter().for_each(|v| {
        ea.insert(v.clone());
    });
    let mut eb = Echelon::new(p, cols);
    b.iter().for_each(|v| {
        eb.insert(v.clone());
    });
    if let Some(v) = a.iter().find(|v| !eb.contains(v)) {
        return Err(v.clone());
    }
    if let Some(v) = b.iter().find(|v| !ea.contains(v)) {
        return Err(v.clone());
    }
    Ok(())
}

/// Checks that the equivariant endomorphisms of the reduced regular
/// representation over `F_p` form a local ring whose maximal ideal is the
/// image of the conjugation transfer, and that adding a transferred
/// endomorphism never changes invertibility.
///
/// The invertibility comparison runs over all pairs for `p <= 5` and over
/// `SAMPLED_PAIRS` seeded random pairs for `p = 7`.
pub fn endo_transfer_ideal_check(p: u64, seed: u64) -> Result<EndoReport, CpError> {
    if ![2, 3, 5, 7].contains(&p) {
        return Err(CpError::Unsupported(format!("endomorphism check needs p in {{2,3,5,7}}, got {p}")));
    }
    let pp = p as u32;
    let rb = standard_module(ModuleKind::Rhobar, ResidueRing::prime_field(p));
    let gamma = rb.gamma().to_fp();
    let n = gamma.rows();
    let gamma_inv = gamma.pow(p - 1);
    let fail = |detail: &str, v: &[u32]| CpError::CheckFailed {
        detail: detail.to_string(),
        counterexample: format!("{:?}", to_matrix(pp, n, v)),
    };

    // Commutant: kernel of X -> gamma X - X gamma on n x n matrices.
    let mut comm_map = FpMatrix::zeros(pp, n * n, n * n);
    for k in 0..n * n {
        let mut e = vec![0u32; n * n];
        e[k] = 1;
        let x = to_matrix(pp, n, &e);
        let d = gamma.mul(&x).sub(&x.mul(&gamma));
        for (i, v) in flatten(&d).into_iter().enumerate() {
            comm_map.set(i, k, v);
        }
    }
    let ker = comm_map.kernel();
    let basis: Vec<Vec<u32>> = (0..ker.rows()).map(|i| ker.row(i).to_vec()).collect();
    let m = basis.len();

    let elements: Vec<Vec<u32>> = all_coefficients(pp, m).map(|c| combination(pp, n * n, &basis, &c)).collect();
    let nonunits: Vec<Vec<u32>> =
        elements.iter().filter(|e| !to_matrix(pp, n, e).is_invertible()).cloned().collect();

    // (a) non-units form a subspace closed under multiplication by the ring.
    let mut span = Echelon::new(pp, n * n);
    for v in &nonunits {
        span.insert(v.clone());
    }
    if (pp as u64).pow(span.rank() as u32) != nonunits.len() as u64 {
        let bad = elements
            .iter()
            .find(|e| span.contains(e) && to_matrix(pp, n, e).is_invertible())
            .cloned()
            .unwrap_or_default();
        return Err(fail("non-units are not closed under addition", &bad));
    }
    for b in span.rows() {
        let bm = to_matrix(pp, n, b);
        for c in &basis {
            let cm = to_matrix(pp, n, c);
            for prod in [cm.mul(&bm), bm.mul(&cm)] {
                if !span.contains(&flatten(&prod)) {
                    return Err(fail("non-units are not an ideal", &flatten(&prod)));
                }
            }
        }
    }

    // (b) the ideal is the image of psi -> sum gamma^k psi gamma^{-k}.
    let mut transfers = Vec::new();
    for k in 0..n * n {
        let mut e = vec![0u32; n * n];
        e[k] = 1;
        let psi = to_matrix(pp, n, &e);
        let mut acc = FpMatrix::zeros(pp, n, n);
        let (mut g, mut gi) = (FpMatrix::identity(pp, n), FpMatrix::identity(pp, n));
        for _ in 0..p {
            acc = acc.add(&g.mul(&psi).mul(&gi));
            g = g.mul(&gamma);
            gi = gi.mul(&gamma_inv);
        }
        transfers.push(flatten(&acc));
    }
    let ideal_basis: Vec<Vec<u32>> = span.rows().to_vec();
    same_span(pp, n * n, &ideal_basis, &transfers)
        .map_err(|v| fail("transfer image differs from the non-unit ideal", &v))?;

    // (c) phi invertible iff phi + Tr(psi) invertible.
    let mut tr_echelon = Echelon::new(pp, n * n);
    for t in &transfers {
        tr_echelon.insert(t.clone());
    }
    let tr_basis: Vec<Vec<u32>> = tr_echelon.rows().to_vec();
    let check_pair = |phi: &[u32], tau: &[u32]| -> Result<(), CpError> {
        let sum: Vec<u32> = phi.iter().zip(tau).map(|(a, b)| (a + b) % pp).collect();
        if to_matrix(pp, n, phi).is_invertible() != to_matrix(pp, n, &sum).is_invertible() {
            return Err(fail("adding a transfer changed invertibility", &sum));
        }
        Ok(())
    };
    let (mode, pairs, seed_used) = if p <= 5 {
        let taus: Vec<Vec<u32>> =
            all_coefficients(pp, tr_basis.len()).map(|c| combination(pp, n * n, &tr_basis, &c)).collect();
        for phi in &elements {
            for tau in &taus {
                check_pair(phi, tau)?;
            }
        }
        ("exhaustive", (elements.len() * taus.len()) as u64, None)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..SAMPLED_PAIRS {
            let phi = &elements[rng.gen_range(0..elements.len())];
            let c: Vec<u32> = (0..tr_basis.len()).map(|_| rng.gen_range(0..pp)).collect();
            check_pair(phi, &combination(pp, n * n, &tr_basis, &c))?;
        }
        ("sampled", SAMPLED_PAIRS as u64, Some(seed))
    };

    Ok(EndoReport {
        p,
        commutant_size: elements.len() as u64,
        nonunit_count: nonunits.len() as u64,
        ideal_is_two_sided: true,
        ideal_equals_transfer_image: true,
        perturbation_mode: mode.to_string(),
        perturbation_pairs: pairs,
        seed: seed_used,
    })
}
