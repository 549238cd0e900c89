//! Toeplitz matrices `(x_{i-j})` and the nilpotent shift matrices `J^t`.
//!
//! An `n x d` Toeplitz matrix is determined by its `n + d - 1` diagonal
//! values, indexed by `k = i - j` running from `1 - d` to `n - 1` (row and
//! column indices are one-based here, matching every report this crate
//! emits). That diagonal index is the canonical variable index shared with
//! the symbolic layer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::field::{FieldScalar, PrimeField};
use crate::matrix::ExactMatrix;
use crate::{Error, Result};

/// Dimensions plus diagonal values of an `n x d` Toeplitz matrix.
///
/// Plain data: values are arbitrary integers and are reduced into the field
/// when the matrix is built. The JSON form is
/// `{"n": .., "d": .., "diagonals": [..]}` with diagonals listed from
/// `k = 1 - d` up to `k = n - 1`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ToeplitzSpec {
    pub n: usize,
    pub d: usize,
    pub diagonals: Vec<u64>,
}

impl ToeplitzSpec {
    pub fn new(n: usize, d: usize, diagonals: Vec<u64>) -> Result<Self> {
        let expected = n + d - 1;
        if diagonals.len() != expected {
            return Err(Error::DiagonalCount {
                n,
                d,
                expected,
                got: diagonals.len(),
            });
        }
        assert!(n >= d && d >= 1, "require n >= d >= 1");
        Ok(ToeplitzSpec { n, d, diagonals })
    }

    /// Uniform i.i.d. diagonals; reproducible from the caller's rng.
    pub fn sample<R: Rng + ?Sized>(n: usize, d: usize, field: PrimeField, rng: &mut R) -> Self {
        assert!(n >= d && d >= 1, "require n >= d >= 1");
        let diagonals = (0..n + d - 1).map(|_| field.sample(rng).value()).collect();
        ToeplitzSpec { n, d, diagonals }
    }

    /// Value on diagonal `k = i - j`, for `1-d <= k <= n-1`.
    pub fn diagonal(&self, k: i64) -> u64 {
        let idx = k + self.d as i64 - 1;
        assert!(
            (0..self.diagonals.len() as i64).contains(&idx),
            "diagonal index {k} outside {}..={}",
            1 - self.d as i64,
            self.n as i64 - 1
        );
        self.diagonals[idx as usize]
    }

    /// Entry at one-based position `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> u64 {
        assert!((1..=self.n).contains(&i) && (1..=self.d).contains(&j));
        self.diagonal(i as i64 - j as i64)
    }

    /// The matrix `U` with `U[i][j] = diagonals[i - j]`.
    pub fn build(&self, field: PrimeField) -> ExactMatrix {
        ExactMatrix::from_fn(field, self.n, self.d, |i, j| {
            field.elem(self.diagonal(i as i64 - j as i64))
        })
    }
}

/// The shift matrix for offset `t`: the lower Jordan block power `J^t` for
/// `t >= 0` (ones at `(i+t, i)`), the transpose power for `t < 0` (ones at
/// `(i, i+|t|)`), and the identity for `t = 0`.
pub fn shift_matrix(field: PrimeField, n: usize, t: i64) -> ExactMatrix {
    assert!((t.unsigned_abs() as usize) < n, "|t| must be < n");
    let mut m = ExactMatrix::zeros(field, n, n);
    let s = t.unsigned_abs() as usize;
    for i in 0..n - s {
        if t >= 0 {
            m.set(i + s, i, field.one());
        } else {
            m.set(i, i + s, field.one());
        }
    }
    m
}

/// `J^t * u` for a vector: shift down by `t`, zero-fill on top (`t >= 0`).
pub fn shift_vec_down(field: PrimeField, v: &[FieldScalar], t: usize) -> Vec<FieldScalar> {
    let mut out = vec![field.zero(); v.len()];
    out[t..].copy_from_slice(&v[..v.len() - t]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f() -> PrimeField {
        PrimeField::mersenne61()
    }

    #[test]
    fn single_column_layout() {
        let spec = ToeplitzSpec::new(2, 1, vec![10, 20]).unwrap();
        let m = spec.build(f());
        assert_eq!((m.rows(), m.cols()), (2, 1));
        assert_eq!(m.get(0, 0).value(), 10); // x_0
        assert_eq!(m.get(1, 0).value(), 20); // x_1
    }

    #[test]
    fn diagonal_count_is_enforced() {
        assert!(matches!(
            ToeplitzSpec::new(6, 3, vec![0; 7]),
            Err(Error::DiagonalCount {
                expected: 8,
                got: 7,
                ..
            })
        ));
        assert!(ToeplitzSpec::new(6, 3, vec![0; 8]).is_ok());
    }

    #[test]
    fn entries_are_constant_along_diagonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = ToeplitzSpec::sample(6, 3, f(), &mut rng);
        let m = spec.build(f());
        for i in 1..=6usize {
            for j in 1..=3usize {
                assert_eq!(
                    m.get(i - 1, j - 1).value(),
                    spec.diagonal(i as i64 - j as i64)
                );
            }
        }
        // entry(4, 2) sits on diagonal k = 2 for any spec with n >= 4, d >= 2.
        assert_eq!(spec.entry(4, 2), spec.diagonal(2));
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = ToeplitzSpec::sample(6, 3, f(), &mut ChaCha8Rng::seed_from_u64(9));
        let b = ToeplitzSpec::sample(6, 3, f(), &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_toeplitz_has_full_column_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let spec = ToeplitzSpec::sample(6, 3, f(), &mut rng);
            assert_eq!(spec.build(f()).rank(), 3);
        }
    }

    #[test]
    fn sampled_column_is_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let spec = ToeplitzSpec::sample(2, 1, f(), &mut rng);
            assert!(!spec.build(f()).is_zero());
        }
    }

    #[test]
    fn shift_matrix_layout() {
        assert_eq!(shift_matrix(f(), 4, 0), ExactMatrix::identity(f(), 4));
        let j = shift_matrix(f(), 3, 1);
        let expected =
            ExactMatrix::from_rows_i64(f(), &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]);
        assert_eq!(j, expected);
        assert_eq!(shift_matrix(f(), 3, -1), j.transpose());
    }

    #[test]
    fn shift_powers_compose() {
        for t in 0..4i64 {
            for u in 0..4i64 {
                if t + u >= 6 {
                    continue;
                }
                let lhs = shift_matrix(f(), 6, t).mul(&shift_matrix(f(), 6, u));
                assert_eq!(lhs, shift_matrix(f(), 6, t + u), "t={t} u={u}");
            }
        }
    }

    #[test]
    fn shift_times_toeplitz_moves_rows_down() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = ToeplitzSpec::sample(6, 3, f(), &mut rng);
        let u = spec.build(f());
        for t in 0..3usize {
            let shifted = shift_matrix(f(), 6, t as i64).mul(&u);
            for j in 0..3 {
                let col = shift_vec_down(f(), &u.column(j), t);
                assert_eq!(shifted.column(j), col);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = ToeplitzSpec::new(3, 2, vec![1, 2, 3, 4]).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"n":3,"d":2,"diagonals":[1,2,3,4]}"#);
        let back: ToeplitzSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
