mod common;

use common::oracle::{binomial, jordan_form, sym_gamma, verify};
use muorient_core::cpmod::{jordan_type, standard_module, ModuleKind};
use muorient_core::ring::ResidueRing;
use muorient_core::symdecomp::{decompose_sym, sym_module};

#[test]
fn oracle_sym_matrix_matches_library() {
    for (p, kmax) in [(2, 6), (3, 8), (5, 4)] {
        for k in 0..=kmax {
            let ours = sym_gamma(p, k);
            let lib = sym_module(p, k, ResidueRing::prime_field(p)).gamma().to_fp();
            assert_eq!(ours.len() as u64, binomial(k as u64 + p - 2, k as u64));
            // The bases may be ordered differently, so compare similarity classes.
            let lib_rows: Vec<Vec<u64>> =
                (0..lib.rows()).map(|i| (0..lib.cols()).map(|j| lib.get(i, j) as u64).collect()).collect();
            assert_eq!(jordan_form(p, &ours).sizes, jordan_form(p, &lib_rows).sizes, "p = {p}, k = {k}");
        }
    }
}

#[test]
fn brute_force_jordan_forms_agree() {
    for p in [2, 3] {
        for k in 0..=12 {
            let gamma = sym_gamma(p, k);
            let form = jordan_form(p, &gamma);
            assert!(verify(p, &gamma, &form), "explicit chains fail for p = {p}, k = {k}");
            let lib = decompose_sym(p, k).unwrap();
            assert_eq!(form.sizes, lib.jordan.counts, "p = {p}, k = {k}");
        }
    }
}

#[test]
fn oracle_on_standard_modules() {
    for p in [2u64, 3, 5, 7] {
        for kind in [ModuleKind::Trivial, ModuleKind::Rhobar, ModuleKind::Regular] {
            let m = standard_module(kind, ResidueRing::prime_field(p));
            let g = m.gamma().to_fp();
            let rows: Vec<Vec<u64>> = (0..g.rows()).map(|i| (0..g.cols()).map(|j| g.get(i, j) as u64).collect()).collect();
            let form = jordan_form(p, &rows);
            assert!(verify(p, &rows, &form));
            assert_eq!(form.sizes, jordan_type(&m).unwrap().counts, "p = {p}, {kind:?}");
        }
    }
}
