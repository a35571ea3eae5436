use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::local::mod_inverse;
use super::{CoeffRing, RingError};

/// The residue ring `Z/p^N`; `N = 1` is the prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueRing {
    prime: u64,
    exponent: u32,
    modulus: u64,
}

impl ResidueRing {
    pub fn new(prime: u64, exponent: u32) -> Self {
        assert!(exponent >= 1, "exponent must be at least 1");
        let modulus = prime
            .checked_pow(exponent)
            .filter(|&m| m < (1 << 62))
            .expect("modulus p^N too large");
        ResidueRing { prime, exponent, modulus }
    }

    pub fn prime_field(prime: u64) -> Self {
        Self::new(prime, 1)
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_field(&self) -> bool {
        self.exponent == 1
    }

    pub fn reduce_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.modulus as i64) as u64
    }
}

impl CoeffRing for ResidueRing {
    type Elem = u64;

    fn prime(&self) -> u64 {
        self.prime
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i64(n)
    }
    fn from_bigint(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap()
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.modulus - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus as u128) as u64
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn valuation(&self, a: &u64) -> Option<u32> {
        if *a == 0 {
            return None;
        }
        let mut v = 0;
        let mut x = *a;
        while x % self.prime == 0 {
            x /= self.prime;
            v += 1;
        }
        Some(v)
    }
    fn exact_div(&self, a: &u64, b: &u64) -> Option<u64> {
        let vb = self.valuation(b)?;
        match self.valuation(a) {
            None => return Some(0),
            Some(va) if va < vb => return None,
            _ => {}
        }
        // a = p^vb a', b = p^vb u; the quotient is a' u^{-1}, well defined mod p^(N - vb).
        let pv = self.prime.pow(vb);
        let m = self.modulus / pv;
        let a1 = (a / pv) % m;
        let u = (b / pv) % m;
        let inv = mod_inverse(u, m)?;
        Some(((a1 as u128 * inv as u128) % m as u128) as u64)
    }
    fn residue(&self, a: &u64) -> u64 {
        a % self.prime
    }
    fn format_elem(&self, a: &u64) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<u64, RingError> {
        let err = |reason: &str| RingError::Parse { input: s.to_string(), reason: reason.to_string() };
        let t = s.trim();
        match t.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| err("bad numerator"))?;
                let d: i64 = d.trim().parse().map_err(|_| err("bad denominator"))?;
                let d = self.reduce_i64(d);
                let inv = mod_inverse(d, self.modulus).ok_or_else(|| err("denominator not a unit"))?;
                Ok(self.mul(&self.reduce_i64(n), &inv))
            }
            None => {
                let n: i64 = t.parse().map_err(|_| err("bad integer"))?;
                Ok(self.reduce_i64(n))
            }
        }
    }
    fn name(&self) -> String {
        if self.exponent == 1 {
            format!("F_{}", self.prime)
        } else {
            format!("Z/{}", self.modulus)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_representatives() {
        let r = ResidueRing::new(3, 2);
        assert_eq!(r.modulus(), 9);
        assert_eq!(r.from_i64(-1), 8);
        assert_eq!(r.add(&5, &7), 3);
        assert_eq!(r.sub(&2, &7), 4);
        assert_eq!(r.mul(&4, &7), 1);
        assert_eq!(r.parse_elem("1/2").unwrap(), 5);
    }

    #[test]
    fn exact_division_in_z_mod_p_power() {
        let r = ResidueRing::new(3, 3);
        assert_eq!(r.valuation(&18), Some(2));
        let q = r.exact_div(&18, &9).unwrap();
        assert_eq!(r.mul(&q, &9), 18);
        assert_eq!(r.exact_div(&3, &9), None);
        let q = r.exact_div(&6, &12).unwrap();
        assert_eq!(r.mul(&q, &12), 6);
    }

    #[test]
    fn prime_field_inverse() {
        let f = ResidueRing::prime_field(7);
        for a in 1..7u64 {
            let inv = f.inverse(&a).unwrap();
            assert_eq!(f.mul(&a, &inv), 1);
        }
        assert_eq!(f.inverse(&0), None);
    }
}
