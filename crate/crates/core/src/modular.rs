//! Residue arithmetic modulo an odd integer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd modulus `p`, with its primality recorded at construction.
///
/// Prime-only operations call [`Modulus::require_prime`] and reject composite
/// moduli explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Modulus {
    p: u32,
    prime: bool,
}

impl Modulus {
    /// An odd prime modulus.
    pub fn prime(p: u32) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) || !is_prime(p as u64) {
            return Err(Error::NotOddPrime(p));
        }
        Ok(Modulus { p, prime: true })
    }

    /// Any odd modulus `p >= 3`; primality is recorded.
    pub fn odd(p: u32) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(Error::EvenModulus(p));
        }
        Ok(Modulus {
            p,
            prime: is_prime(p as u64),
        })
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn usize(self) -> usize {
        self.p as usize
    }

    pub fn is_prime(self) -> bool {
        self.prime
    }

    pub fn require_prime(self) -> Result<Self> {
        if self.prime {
            Ok(self)
        } else {
            Err(Error::NotOddPrime(self.p))
        }
    }

    /// Least non-negative representative of `x`.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - (b % self.p) as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn pow(self, base: u32, mut exp: u64) -> u32 {
        let m = self.p as u64;
        let mut b = base as u64 % m;
        let mut acc = 1 % m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % m;
            }
            b = b * b % m;
            exp >>= 1;
        }
        acc as u32
    }

    pub fn gcd_with(self, a: u32) -> u32 {
        gcd(a % self.p, self.p)
    }

    pub fn is_unit(self, a: u32) -> bool {
        self.gcd_with(a) == 1
    }

    /// Inverse of `a`, taken as the least non-negative representative.
    pub fn inv(self, a: u32) -> Result<u32> {
        let (g, x, _) = ext_gcd((a % self.p) as i64, self.p as i64);
        if g != 1 {
            return Err(Error::NotAUnit { value: a, p: self.p });
        }
        Ok(self.reduce(x))
    }

    /// `a / b`.
    pub fn div(self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Modular square root (Tonelli–Shanks, smallest non-residue as the
    /// auxiliary), returning the least root or `None` for a non-residue.
    pub fn sqrt(self, a: u32) -> Result<Option<u32>> {
        self.require_prime()?;
        let p = self.p;
        let a = a % p;
        if a == 0 {
            return Ok(Some(0));
        }
        let legendre = |x: u32| self.pow(x, ((p - 1) / 2) as u64);
        if legendre(a) != 1 {
            return Ok(None);
        }
        let mut q = (p - 1) as u64;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let z = (2..p).find(|&z| legendre(z) == p - 1).expect("odd prime has a non-residue");
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, q.div_ceil(2));
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let b = self.pow(c, 1u64 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Ok(Some(r.min(p - r)))
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Modulus::odd(p)
    }
}

impl From<Modulus> for u32 {
    fn from(m: Modulus) -> u32 {
        m.p
    }
}

impl std::fmt::Display for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.p)
    }
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Deterministic trial division; moduli here stay far below 2^32.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Odd primes in `lo..=hi`.
pub fn odd_primes(lo: u32, hi: u32) -> Vec<u32> {
    (lo.max(3)..=hi).filter(|&n| n % 2 == 1 && is_prime(n as u64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composites_and_even() {
        assert!(Modulus::prime(9).is_err());
        assert!(Modulus::prime(4).is_err());
        assert!(Modulus::odd(8).is_err());
        let m = Modulus::odd(9).unwrap();
        assert!(!m.is_prime());
        assert!(m.require_prime().is_err());
    }

    #[test]
    fn inverses_are_least_representatives() {
        let m = Modulus::prime(7).unwrap();
        assert_eq!(m.inv(3).unwrap(), 5);
        assert_eq!(m.inv(2).unwrap(), 4);
        let m9 = Modulus::odd(9).unwrap();
        assert!(m9.inv(3).is_err());
        assert_eq!(m9.inv(2).unwrap(), 5);
    }

    #[test]
    fn sqrt_examples() {
        let m7 = Modulus::prime(7).unwrap();
        assert_eq!(m7.sqrt(m7.neg(3)).unwrap(), Some(2));
        let m11 = Modulus::prime(11).unwrap();
        assert_eq!(m11.sqrt(m11.neg(3)).unwrap(), None);
        assert_eq!(m11.sqrt(0).unwrap(), Some(0));
        assert!(Modulus::odd(9).unwrap().sqrt(4).is_err());
    }

    #[test]
    fn sqrt_matches_exhaustive_roots() {
        for p in odd_primes(3, 400) {
            let m = Modulus::prime(p).unwrap();
            for a in 0..p {
                let least = (0..p).find(|&r| m.mul(r, r) == a);
                assert_eq!(m.sqrt(a).unwrap(), least, "p={p} a={a}");
            }
        }
    }
}
