use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{CoeffRing, RingError};

/// An element of the p-local integers `Z_(p)`: a reduced fraction whose
/// denominator is prime to `p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LocalRational {
    value: BigRational,
    prime: u64,
}

impl LocalRational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>, prime: u64) -> Result<Self, RingError> {
        let den = den.into();
        if den.is_zero() {
            return Err(RingError::Invalid("zero denominator".into()));
        }
        Self::from_rational(BigRational::new(num.into(), den), prime)
    }

    pub fn from_rational(value: BigRational, prime: u64) -> Result<Self, RingError> {
        if (value.denom() % prime).is_zero() {
            return Err(RingError::NotPLocal { value: value.to_string(), prime });
        }
        Ok(LocalRational { value, prime })
    }

    pub fn integer(n: impl Into<BigInt>, prime: u64) -> Self {
        LocalRational { value: BigRational::from_integer(n.into()), prime }
    }

    pub fn zero(prime: u64) -> Self {
        Self::integer(0, prime)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn numer(&self) -> &BigInt {
        self.value.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.value.denom()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.value.is_integer()
    }

    fn same_prime(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "mixing Z_({}) and Z_({})", self.prime, other.prime);
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_prime(other);
        let value = if self.value.is_integer() && other.value.is_integer() {
            BigRational::from_integer(self.value.numer() + other.value.numer())
        } else {
            &self.value + &other.value
        };
        LocalRational { value, prime: self.prime }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.same_prime(other);
        let value = if self.value.is_integer() && other.value.is_integer() {
            BigRational::from_integer(self.value.numer() - other.value.numer())
        } else {
            &self.value - &other.value
        };
        LocalRational { value, prime: self.prime }
    }

    pub fn neg(&self) -> Self {
        LocalRational { value: -&self.value, prime: self.prime }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_prime(other);
        let value = if self.value.is_integer() && other.value.is_integer() {
            BigRational::from_integer(self.value.numer() * other.value.numer())
        } else {
            &self.value * &other.value
        };
        LocalRational { value, prime: self.prime }
    }

    /// Division inside `Z_(p)`; fails when the quotient picks up a factor of
    /// `p` in its denominator.
    pub fn checked_div(&self, other: &Self) -> Result<Self, RingError> {
        self.same_prime(other);
        if other.value.is_zero() {
            return Err(RingError::NotPLocal { value: "0".into(), prime: self.prime });
        }
        Self::from_rational(&self.value / &other.value, self.prime)
    }

    /// p-adic valuation of the element (`None` for zero).
    pub fn valuation(&self) -> Option<u32> {
        if self.value.is_zero() {
            return None;
        }
        let p = BigInt::from(self.prime);
        let mut n = self.value.numer().abs();
        let mut v = 0;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            n = q;
            v += 1;
        }
        Some(v)
    }

    /// Image in `F_p`.
    pub fn residue(&self) -> u64 {
        let p = BigInt::from(self.prime);
        let num = self.value.numer().mod_floor(&p);
        let den = self.value.denom().mod_floor(&p);
        let inv = mod_inverse(den.to_u64().unwrap(), self.prime).expect("denominator prime to p");
        (num.to_u64().unwrap() as u128 * inv as u128 % self.prime as u128) as u64
    }
}

impl fmt::Display for LocalRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.is_integer() {
            write!(f, "{}", self.value.numer())
        } else {
            write!(f, "{}/{}", self.value.numer(), self.value.denom())
        }
    }
}

impl fmt::Debug for LocalRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = egcd(a as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// The ring `Z_(p)` of p-local rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PLocal {
    pub p: u64,
}

impl PLocal {
    pub fn new(p: u64) -> Self {
        PLocal { p }
    }
}

impl CoeffRing for PLocal {
    type Elem = LocalRational;

    fn prime(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> LocalRational {
        LocalRational::zero(self.p)
    }
    fn one(&self) -> LocalRational {
        LocalRational::integer(1, self.p)
    }
    fn from_i64(&self, n: i64) -> LocalRational {
        LocalRational::integer(n, self.p)
    }
    fn from_bigint(&self, n: &BigInt) -> LocalRational {
        LocalRational::integer(n.clone(), self.p)
    }
    fn add(&self, a: &LocalRational, b: &LocalRational) -> LocalRational {
        a.add(b)
    }
    fn sub(&self, a: &LocalRational, b: &LocalRational) -> LocalRational {
        a.sub(b)
    }
    fn neg(&self, a: &LocalRational) -> LocalRational {
        a.neg()
    }
    fn mul(&self, a: &LocalRational, b: &LocalRational) -> LocalRational {
        a.mul(b)
    }
    fn is_zero(&self, a: &LocalRational) -> bool {
        a.is_zero()
    }
    fn is_one(&self, a: &LocalRational) -> bool {
        a.value.is_one()
    }
    fn add_assign(&self, a: &mut LocalRational, b: &LocalRational) {
        if a.value.is_integer() && b.value.is_integer() {
            let n = a.value.numer() + b.value.numer();
            a.value = BigRational::from_integer(n);
        } else {
            a.value = &a.value + &b.value;
        }
    }
    fn valuation(&self, a: &LocalRational) -> Option<u32> {
        a.valuation()
    }
    fn exact_div(&self, a: &LocalRational, b: &LocalRational) -> Option<LocalRational> {
        a.checked_div(b).ok()
    }
    fn residue(&self, a: &LocalRational) -> u64 {
        a.residue()
    }
    fn format_elem(&self, a: &LocalRational) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<LocalRational, RingError> {
        let err = |reason: &str| RingError::Parse { input: s.to_string(), reason: reason.to_string() };
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.parse().map_err(|_| err("bad denominator"))?;
        LocalRational::new(n, d, self.p)
    }
    fn name(&self) -> String {
        format!("Z_({})", self.p)
    }
}
