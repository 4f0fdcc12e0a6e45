//! Arithmetic in prime fields `F_l` with `l < 2^16`.
//!
//! Residues are stored as `u16` and products are formed in `u64`, so no
//! intermediate ever overflows.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Exclusive upper bound on supported moduli.
pub const MAX_MODULUS: u32 = 1 << 16;

/// A prime `l` with `2 <= l < 2^16`, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeModulus(u16);

impl PrimeModulus {
    pub fn new(ell: u32) -> Result<Self> {
        if !(2..MAX_MODULUS).contains(&ell) || !is_prime_u64(u64::from(ell)) {
            return Err(Error::NotPrime(u64::from(ell)));
        }
        Ok(PrimeModulus(ell as u16))
    }

    #[inline]
    pub fn get(self) -> u32 {
        u32::from(self.0)
    }

    /// Reduce an arbitrary signed integer into `[0, l)`.
    #[inline]
    pub fn reduce(self, x: i64) -> u16 {
        x.rem_euclid(i64::from(self.0)) as u16
    }

    #[inline]
    pub fn add(self, a: u16, b: u16) -> u16 {
        ((u32::from(a) + u32::from(b)) % self.get()) as u16
    }

    #[inline]
    pub fn sub(self, a: u16, b: u16) -> u16 {
        ((u32::from(a) + self.get() - u32::from(b)) % self.get()) as u16
    }

    #[inline]
    pub fn neg(self, a: u16) -> u16 {
        if a == 0 {
            0
        } else {
            (self.get() - u32::from(a)) as u16
        }
    }

    #[inline]
    pub fn mul(self, a: u16, b: u16) -> u16 {
        ((u64::from(a) * u64::from(b)) % u64::from(self.0)) as u16
    }

    pub fn pow(self, base: u16, mut exp: u64) -> u16 {
        let m = u64::from(self.0);
        let mut acc = 1 % m;
        let mut b = u64::from(base) % m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % m;
            }
            b = b * b % m;
            exp >>= 1;
        }
        acc as u16
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: u16) -> Option<u16> {
        if a % self.0 == 0 {
            None
        } else {
            Some(self.pow(a, u64::from(self.0) - 2))
        }
    }

    /// Order of the unit group `F_l^x`.
    pub fn unit_order(self) -> u32 {
        self.get() - 1
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<u32> for PrimeModulus {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        PrimeModulus::new(v)
    }
}

impl From<PrimeModulus> for u32 {
    fn from(m: PrimeModulus) -> u32 {
        m.get()
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes `<= bound`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Euler's totient of a machine integer, by trial division.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}
