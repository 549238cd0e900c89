//! Dense matrices over F_p with exact rank, nullspace and determinant.
//!
//! Matrices are immutable values; elimination always works on an internal
//! copy. Pivoting picks the first non-zero entry in a column, which is all
//! exact arithmetic needs.

use std::fmt;
use std::ops::Range;

use rand::Rng;

use crate::field::{FieldScalar, PrimeField};

#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldScalar>,
    field: PrimeField,
}

impl ExactMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
            field,
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_fn(
        field: PrimeField,
        rows: usize,
        cols: usize,
        mut entry: impl FnMut(usize, usize) -> FieldScalar,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(entry(i, j));
            }
        }
        ExactMatrix {
            rows,
            cols,
            data,
            field,
        }
    }

    /// Rows of signed integers, reduced into the field. Panics on ragged input.
    pub fn from_rows_i64(field: PrimeField, rows: &[Vec<i64>]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        assert!(
            rows.iter().all(|r| r.len() == width),
            "rows must all have length {width}"
        );
        Self::from_fn(field, height, width, |i, j| field.elem_i64(rows[i][j]))
    }

    /// I.i.d. uniform entries, reproducible from the caller's rng.
    pub fn random<R: Rng + ?Sized>(
        field: PrimeField,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Self {
        Self::from_fn(field, rows, cols, |_, _| field.sample(rng))
    }

    pub fn from_column(field: PrimeField, column: &[FieldScalar]) -> Self {
        ExactMatrix {
            rows: column.len(),
            cols: 1,
            data: column.to_vec(),
            field,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> FieldScalar {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldScalar) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<FieldScalar> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.field, rhs.field, "mixed fields");
        assert_eq!(
            self.cols, rhs.rows,
            "shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let f = self.field;
        Self::from_fn(f, self.rows, rhs.cols, |i, j| {
            let mut acc = f.zero();
            for k in 0..self.cols {
                acc = f.add(acc, f.mul(self.get(i, k), rhs.get(k, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[FieldScalar]) -> Vec<FieldScalar> {
        assert_eq!(self.cols, v.len());
        let f = self.field;
        (0..self.rows)
            .map(|i| {
                v.iter().enumerate().fold(f.zero(), |acc, (k, &vk)| {
                    f.add(acc, f.mul(self.get(i, k), vk))
                })
            })
            .collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let f = self.field;
        Self::from_fn(f, self.rows, self.cols, |i, j| {
            f.sub(self.get(i, j), rhs.get(i, j))
        })
    }

    /// `[self, rhs]` side by side.
    pub fn hconcat(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "row mismatch in hconcat");
        Self::from_fn(self.field, self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                rhs.get(i, j - self.cols)
            }
        })
    }

    /// `self` stacked on top of `rhs`.
    pub fn vconcat(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "column mismatch in vconcat");
        Self::from_fn(self.field, self.rows + rhs.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j)
            } else {
                rhs.get(i - self.rows, j)
            }
        })
    }

    pub fn submatrix(&self, row_range: Range<usize>, col_range: Range<usize>) -> Self {
        assert!(row_range.end <= self.rows && col_range.end <= self.cols);
        Self::from_fn(self.field, row_range.len(), col_range.len(), |i, j| {
            self.get(row_range.start + i, col_range.start + j)
        })
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(self.field, rows.len(), self.cols, |i, j| {
            self.get(rows[i], j)
        })
    }

    /// Forward elimination on a copy; returns pivot (row, col) pairs and the
    /// number of row swaps performed.
    fn echelonize(work: &mut ExactMatrix) -> (Vec<(usize, usize)>, usize) {
        let f = work.field;
        let mut pivots = Vec::new();
        let mut swaps = 0;
        let mut r = 0;
        for c in 0..work.cols {
            if r == work.rows {
                break;
            }
            let Some(k) = (r..work.rows).find(|&k| !work.get(k, c).is_zero()) else {
                continue;
            };
            if k != r {
                for j in c..work.cols {
                    let (a, b) = (work.get(r, j), work.get(k, j));
                    work.set(r, j, b);
                    work.set(k, j, a);
                }
                swaps += 1;
            }
            let pivot_inv = f.inv(work.get(r, c));
            for i in r + 1..work.rows {
                let lead = work.get(i, c);
                if lead.is_zero() {
                    continue;
                }
                let factor = f.mul(lead, pivot_inv);
                for j in c..work.cols {
                    let v = f.sub(work.get(i, j), f.mul(factor, work.get(r, j)));
                    work.set(i, j, v);
                }
            }
            pivots.push((r, c));
            r += 1;
        }
        (pivots, swaps)
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        Self::echelonize(&mut work).0.len()
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> FieldScalar {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let f = self.field;
        let mut work = self.clone();
        let (pivots, swaps) = Self::echelonize(&mut work);
        if pivots.len() < self.rows {
            return f.zero();
        }
        let mut det = f.one();
        for &(r, c) in &pivots {
            det = f.mul(det, work.get(r, c));
        }
        if swaps % 2 == 1 {
            det = f.neg(det);
        }
        det
    }

    /// Columns form a basis of the right nullspace; the count is always
    /// `cols - rank`.
    pub fn nullspace_basis(&self) -> Self {
        let f = self.field;
        let mut work = self.clone();
        let (pivots, _) = Self::echelonize(&mut work);

        // Back-substitute to reduced row echelon form.
        for idx in (0..pivots.len()).rev() {
            let (r, c) = pivots[idx];
            let scale = f.inv(work.get(r, c));
            for j in c..work.cols {
                work.set(r, j, f.mul(scale, work.get(r, j)));
            }
            for i in 0..r {
                let factor = work.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..work.cols {
                    let v = f.sub(work.get(i, j), f.mul(factor, work.get(r, j)));
                    work.set(i, j, v);
                }
            }
        }

        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free_cols: Vec<usize> = (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Self::zeros(f, self.cols, free_cols.len());
        for (k, &fc) in free_cols.iter().enumerate() {
            basis.set(fc, k, f.one());
            for (&(r, _), &pc) in pivots.iter().zip(pivot_cols.iter()) {
                basis.set(pc, k, f.neg(work.get(r, fc)));
            }
        }
        basis
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ExactMatrix {}x{} mod {} [",
            self.rows,
            self.cols,
            self.field.modulus()
        )?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
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
    fn rank_identity_and_zero() {
        assert_eq!(ExactMatrix::identity(f(), 6).rank(), 6);
        assert_eq!(ExactMatrix::zeros(f(), 4, 4).rank(), 0);
    }

    #[test]
    fn rank_equals_transpose_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let m = ExactMatrix::random(f(), 5, 8, &mut rng);
            assert_eq!(m.rank(), m.transpose().rank());
        }
    }

    #[test]
    fn random_square_is_almost_surely_full_rank() {
        // P(full rank) >= prod(1 - p^-k) with p = 2^61 - 1: all 1000 draws
        // must come out full rank.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            assert_eq!(ExactMatrix::random(f(), 6, 6, &mut rng).rank(), 6);
        }
    }

    #[test]
    fn random_rectangular_has_full_row_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(ExactMatrix::random(f(), 3, 5, &mut rng).rank(), 3);
        }
    }

    #[test]
    fn random_is_reproducible() {
        let a = ExactMatrix::random(f(), 2, 2, &mut ChaCha8Rng::seed_from_u64(1));
        let b = ExactMatrix::random(f(), 2, 2, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn rank_subadditive_under_hconcat() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = ExactMatrix::random(f(), 6, 2, &mut rng);
            let b = ExactMatrix::random(f(), 6, 3, &mut rng);
            assert!(a.hconcat(&b).rank() <= a.rank() + b.rank());
        }
    }

    #[test]
    fn block_lower_triangular_rank_bound() {
        // rank [[R, 0], [S, T]] >= rank R + rank T
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r = ExactMatrix::random(f(), 3, 4, &mut rng);
            let s = ExactMatrix::random(f(), 2, 4, &mut rng);
            let t = ExactMatrix::random(f(), 2, 3, &mut rng);
            let top = r.hconcat(&ExactMatrix::zeros(f(), 3, 3));
            let bottom = s.hconcat(&t);
            let block = top.vconcat(&bottom);
            assert!(block.rank() >= r.rank() + t.rank());
        }
    }

    #[test]
    fn nullspace_of_identity_is_trivial() {
        let ns = ExactMatrix::identity(f(), 5).nullspace_basis();
        assert_eq!(ns.cols(), 0);
        assert_eq!(ns.rows(), 5);
    }

    #[test]
    fn nullspace_of_zero_is_everything() {
        let ns = ExactMatrix::zeros(f(), 4, 4).nullspace_basis();
        assert_eq!(ns.cols(), 4);
    }

    #[test]
    fn nullspace_of_transposition_difference() {
        // I - P for a transposition has rank 1, so the fixed space of the
        // swap has dimension 5.
        let p = crate::perm::Permutation::transposition(6, 2, 5).matrix(f());
        let diff = ExactMatrix::identity(f(), 6).sub(&p);
        assert_eq!(diff.rank(), 1);
        let ns = diff.nullspace_basis();
        assert_eq!(ns.cols(), 5);
        assert!(diff.mul(&ns).is_zero());
    }

    #[test]
    fn nullspace_columns_are_exact_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let m = ExactMatrix::random(f(), 4, 7, &mut rng);
            let ns = m.nullspace_basis();
            assert_eq!(ns.cols(), 7 - m.rank());
            assert!(m.mul(&ns).is_zero());
            // Basis columns are independent.
            assert_eq!(ns.rank(), ns.cols());
        }
    }

    #[test]
    fn det_matches_hand_values() {
        let m = ExactMatrix::from_rows_i64(f(), &[vec![2, 1], vec![7, 4]]);
        assert_eq!(m.det(), f().elem(1));
        let singular = ExactMatrix::from_rows_i64(f(), &[vec![1, 2], vec![2, 4]]);
        assert_eq!(singular.det(), f().zero());
        let swapped = ExactMatrix::from_rows_i64(f(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(swapped.det(), f().elem_i64(-1));
    }

    #[test]
    fn submatrix_and_concat_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = ExactMatrix::random(f(), 5, 6, &mut rng);
        let left = m.submatrix(0..5, 0..2);
        let right = m.submatrix(0..5, 2..6);
        assert_eq!(left.hconcat(&right), m);
        let top = m.submatrix(0..2, 0..6);
        let bottom = m.submatrix(2..5, 0..6);
        assert_eq!(top.vconcat(&bottom), m);
    }
}
