//! Arithmetic in a prime field F_p with a runtime modulus.
//!
//! All numeric linear algebra in this crate is exact arithmetic modulo a
//! large prime. The default is the Mersenne prime 2^61 - 1: products fit in
//! 128-bit intermediates and the Schwartz–Zippel failure probability per
//! sampled determinant is at most deg/p, around 1e-17 for the matrix sizes
//! handled here. 2^31 - 1 is provided as a portability fallback.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// 2^61 - 1, the default modulus.
pub const MERSENNE61: u64 = (1 << 61) - 1;
/// 2^31 - 1, a smaller fallback modulus.
pub const MERSENNE31: u64 = (1 << 31) - 1;

/// A residue in `0..p`. Arithmetic lives on [`PrimeField`], which knows `p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldScalar(u64);

impl FieldScalar {
    pub const ZERO: FieldScalar = FieldScalar(0);
    pub const ONE: FieldScalar = FieldScalar(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field F_p. Copyable context carried by every matrix.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        Self::mersenne61()
    }
}

impl PrimeField {
    /// Field with the default modulus 2^61 - 1.
    pub fn mersenne61() -> Self {
        PrimeField { p: MERSENNE61 }
    }

    /// Field with the fallback modulus 2^31 - 1.
    pub fn mersenne31() -> Self {
        PrimeField { p: MERSENNE31 }
    }

    /// Builds F_p after checking that `p` is prime.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || !is_prime_u64(p) {
            return Err(Error::NonPrimeModulus(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    pub fn zero(self) -> FieldScalar {
        FieldScalar(0)
    }

    pub fn one(self) -> FieldScalar {
        FieldScalar(1 % self.p)
    }

    /// Canonical residue of an unsigned integer.
    pub fn elem(self, v: u64) -> FieldScalar {
        FieldScalar(v % self.p)
    }

    /// Canonical residue of a signed integer.
    pub fn elem_i64(self, v: i64) -> FieldScalar {
        FieldScalar(v.rem_euclid(self.p as i64) as u64)
    }

    pub fn add(self, a: FieldScalar, b: FieldScalar) -> FieldScalar {
        let s = a.0 + b.0;
        FieldScalar(if s >= self.p { s - self.p } else { s })
    }

    pub fn sub(self, a: FieldScalar, b: FieldScalar) -> FieldScalar {
        FieldScalar(if a.0 >= b.0 {
            a.0 - b.0
        } else {
            a.0 + self.p - b.0
        })
    }

    pub fn neg(self, a: FieldScalar) -> FieldScalar {
        FieldScalar(if a.0 == 0 { 0 } else { self.p - a.0 })
    }

    pub fn mul(self, a: FieldScalar, b: FieldScalar) -> FieldScalar {
        FieldScalar((a.0 as u128 * b.0 as u128 % self.p as u128) as u64)
    }

    pub fn pow(self, mut base: FieldScalar, mut exp: u64) -> FieldScalar {
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: FieldScalar) -> FieldScalar {
        assert!(!a.is_zero(), "inverse of zero in F_{}", self.p);
        self.pow(a, self.p - 2)
    }

    /// Uniform sample from `0..p`.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> FieldScalar {
        FieldScalar(rng.random_range(0..self.p))
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for u64 (the first twelve primes suffice as
/// witnesses for every 64-bit integer).
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
