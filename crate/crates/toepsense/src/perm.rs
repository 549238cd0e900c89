//! Permutations of `{1..n}` in one-line image notation.
//!
//! The matrix convention is fixed once and for all: `P[sigma(j)][j] = 1`, so
//! `(P v)_{sigma(j)} = v_j` and `P e_j = e_{sigma(j)}`. Images are stored
//! zero-based internally and exchanged one-based everywhere else.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::field::PrimeField;
use crate::matrix::ExactMatrix;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<usize>, // zero-based: image[j] = sigma(j)
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    /// One-based image list, validated to be a bijection of `{1..n}`.
    pub fn from_one_based(image: Vec<usize>) -> Result<Self> {
        if image.is_empty() {
            return Err(Error::PermEmpty);
        }
        let n = image.len();
        let mut seen = vec![false; n];
        for (pos, &v) in image.iter().enumerate() {
            if v < 1 || v > n {
                return Err(Error::PermOutOfRange {
                    position: pos + 1,
                    value: v as i64,
                    n,
                });
            }
            if seen[v - 1] {
                return Err(Error::PermNotBijective {
                    position: pos + 1,
                    value: v,
                });
            }
            seen[v - 1] = true;
        }
        Ok(Permutation {
            image: image.into_iter().map(|v| v - 1).collect(),
        })
    }

    /// Parses whitespace-separated one-line image notation, e.g.
    /// `"1 3 4 5 6 2"`. Errors carry the one-based position of the offending
    /// entry.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::PermEmpty);
        }
        let n = tokens.len();
        let mut image = Vec::with_capacity(n);
        for (pos, tok) in tokens.iter().enumerate() {
            let v: i64 = tok.parse().map_err(|_| Error::PermSyntax {
                position: pos + 1,
                token: tok.to_string(),
            })?;
            if v < 1 || v > n as i64 {
                return Err(Error::PermOutOfRange {
                    position: pos + 1,
                    value: v,
                    n,
                });
            }
            image.push(v as usize);
        }
        Self::from_one_based(image)
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    /// `sigma(j)` with zero-based `j` and result.
    pub fn apply(&self, j: usize) -> usize {
        self.image[j]
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(j, &v)| j == v)
    }

    /// `self . other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n());
        Permutation {
            image: (0..self.n()).map(|j| self.image[other.image[j]]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.n()];
        for (j, &v) in self.image.iter().enumerate() {
            image[v] = j;
        }
        Permutation { image }
    }

    /// Number of cycles, fixed points counted as cycles.
    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut cycles = 0;
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.image[j];
            }
        }
        cycles
    }

    /// The matrix with `P[sigma(j)][j] = 1`.
    pub fn matrix(&self, field: PrimeField) -> ExactMatrix {
        let mut m = ExactMatrix::zeros(field, self.n(), self.n());
        for (j, &v) in self.image.iter().enumerate() {
            m.set(v, j, field.one());
        }
        m
    }

    /// `P v`: entry `sigma(j)` of the result is `v_j`.
    pub fn permute_vec<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n());
        let mut out = vec![T::default(); v.len()];
        for (j, &s) in self.image.iter().enumerate() {
            out[s] = v[j];
        }
        out
    }

    /// `P^{-1} v = P^T v`: entry `j` of the result is `v_{sigma(j)}`.
    pub fn unpermute_vec<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n());
        (0..self.n()).map(|j| v[self.image[j]]).collect()
    }

    /// The cycle `i -> i + t (mod n)`; `t = 1` is the forward cyclic shift.
    pub fn cyclic_shift(n: usize, t: i64) -> Self {
        let t = t.rem_euclid(n as i64) as usize;
        Permutation {
            image: (0..n).map(|j| (j + t) % n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        assert!(
            a >= 1 && b >= 1 && a <= n && b <= n && a != b,
            "one-based distinct points"
        );
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(a - 1, b - 1);
        Permutation { image }
    }

    /// Conjugation by the order-reversing involution `i -> n + 1 - i`.
    pub fn conjugate_by_reversal(&self) -> Self {
        let n = self.n();
        Permutation {
            image: (0..n).map(|j| n - 1 - self.image[n - 1 - j]).collect(),
        }
    }

    /// Lexicographic rank of the image word among all n! permutations.
    pub fn lex_rank(&self) -> u64 {
        let n = self.n();
        let mut rank = 0u64;
        for i in 0..n {
            let smaller = (i + 1..n)
                .filter(|&j| self.image[j] < self.image[i])
                .count() as u64;
            rank += smaller * factorial((n - 1 - i) as u64);
        }
        rank
    }

    /// Inverse of [`lex_rank`](Self::lex_rank): the `index`-th permutation in
    /// lexicographic order. `unrank(n, 0)` is the identity and
    /// `unrank(n, n! - 1)` is the order-reversing word `n, n-1, .., 1`.
    pub fn unrank(n: usize, mut index: u64) -> Self {
        debug_assert!(index < factorial(n as u64));
        let mut available: Vec<usize> = (0..n).collect();
        let mut image = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let f = factorial(i as u64);
            let digit = (index / f) as usize;
            index %= f;
            image.push(available.remove(digit));
        }
        Permutation { image }
    }
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.image.iter().map(|&v| (v + 1).to_string()).collect();
        write!(f, "{}", words.join(" "))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{self}]")
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(image: Vec<usize>) -> Result<Self> {
        Permutation::from_one_based(image)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.one_based()
    }
}
