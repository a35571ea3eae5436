//! Exact coefficient rings, graded polynomials with a cyclic action, and
//! truncated power series.
//!
//! Every coefficient ring used in this crate is a local ring with residue
//! field `F_p`: the p-local rationals `Z_(p)` and the residue rings `Z/p^N`.
//! Ring values are passed around as context objects (see [`CoeffRing`]), and
//! elements carry no behaviour of their own beyond equality.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

mod local;
mod poly;
mod residue;
mod series;

pub use local::{LocalRational, PLocal};
pub use poly::{monomials_of_degree, Monomial, MultiPoly, PolyJson, RingAction, TermJson, VarSet, Variable};
pub use residue::ResidueRing;
pub use series::{series_solve, SeriesJson, SeriesTermJson, TruncSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("{value} is not invertible in Z_({prime})")]
    NotPLocal { value: String, prime: u64 },
    #[error("term {term} is not divisible by {prime}")]
    NotDivisible { term: String, prime: u64 },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable sets differ: {0} vs {1}")]
    VariableMismatch(String, String),
    #[error("series is not invertible: {0}")]
    NotInvertible(String),
    #[error("fixed-point iteration did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("action does not have order {order}: {detail}")]
    NotOrderP { order: u64, detail: String },
    #[error("{0}")]
    Invalid(String),
}

/// A commutative local coefficient ring whose maximal ideal is generated by a
/// prime `p`.
///
/// Implementors are small context values; arithmetic goes through them so
/// that elements themselves can be plain data (`u64`, rationals).
pub trait CoeffRing: Clone + PartialEq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn prime(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn from_bigint(&self, n: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// p-adic valuation, `None` for zero.
    fn valuation(&self, a: &Self::Elem) -> Option<u32>;

    /// Some `q` with `b * q = a`, when `v(a) >= v(b)`.
    fn exact_div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;

    /// Image in the residue field, as a value in `[0, p)`.
    fn residue(&self, a: &Self::Elem) -> u64;

    fn format_elem(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem, RingError>;

    /// Short name such as `Z_(3)` or `Z/9`.
    fn name(&self) -> String;

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.valuation(a) == Some(0)
    }

    fn inverse(&self, a: &Self::Elem) -> Option<Self::Elem> {
        self.exact_div(&self.one(), a)
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// Returns true when `n` is prime (trial division; only small primes are used).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}
