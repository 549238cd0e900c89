//! The deterministic layer: residual ranks `r_t`, eligible shifts, predicted
//! generic rank of `[V, PV]`, and the USP verdict.
//!
//! For a permutation matrix `P` on `n` points and an offset `t`, the residual
//! rank is
//!
//! * `r_t = rank((P - J^t)[t+1.., ..])` for `t >= 0`, and
//! * `r_t = rank((P - (J^T)^{|t|})[..n-|t|, ..])` for `t < 0`,
//!
//! with `r_0 = rank(I - P) = n - #cycles`. A shift is *eligible* for column
//! count `d` when `|t| <= d/2` and `r_t <= d - 2|t|`; any eligible shift
//! pins the generic rank of `[V, PV]` to `d + r_t + 2|t|`, and the USP holds
//! exactly when that value is `2d` (or unconditionally when `r_0 <= d`).
//!
//! Everything here is integer combinatorics: the matrices involved have
//! entries in `{-1, 0, 1}` and size at most 12, so their minors are bounded
//! by `12^6` in absolute value and ranks computed mod `2^61 - 1` equal the
//! ranks over the rationals. No sampling, no error probability.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::field::PrimeField;
use crate::perm::Permutation;
use crate::toeplitz::shift_matrix;
use crate::{Error, Result};

/// Field used for the deterministic rank computations (see module docs for
/// why the modulus does not matter here).
fn combinatorial_field() -> PrimeField {
    PrimeField::mersenne61()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UspVerdict {
    Holds,
    Fails,
    Unknown,
}

/// Outcome of the rank formula for one permutation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RankPrediction {
    /// All eligible shifts agree on this value.
    Predicted {
        rank: usize,
        witnesses: Vec<(i64, usize)>,
    },
    /// No eligible shift: the rank formula does not apply.
    NotCovered,
}

impl RankPrediction {
    pub fn rank(&self) -> Option<usize> {
        match self {
            RankPrediction::Predicted { rank, .. } => Some(*rank),
            RankPrediction::NotCovered => None,
        }
    }
}

/// Per-permutation summary: residual-rank table, eligible shifts, predicted
/// rank and USP verdict, plus a human-readable certificate of the branch
/// that fired.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ShiftAnalysis {
    pub n: usize,
    pub d: usize,
    pub r0: usize,
    /// `t -> r_t` for all `|t| <= d/2`.
    pub residuals: BTreeMap<i64, usize>,
    /// `(t, r_t)` with `r_t <= d - 2|t|`, ordered by `|t|`, positive first.
    pub eligible: Vec<(i64, usize)>,
    pub predicted_rank: Option<usize>,
    pub usp: UspVerdict,
    pub certificate: String,
}

/// `r_0 = rank(I - P)`, the codimension of the fixed space of the
/// permutation. Equals `n - #cycles`; the exhaustive tests cross-check the
/// two routes.
pub fn r_zero(sigma: &Permutation) -> usize {
    residual_rank(sigma, 0)
}

/// Residual rank `r_t`. Accepts any `|t| < n`; callers enforce the
/// theorem-range `|t| <= d/2`.
pub fn residual_rank(sigma: &Permutation, t: i64) -> usize {
    let n = sigma.n();
    assert!((t.unsigned_abs() as usize) < n, "|t| must be < n");
    let field = combinatorial_field();
    let diff = sigma.matrix(field).sub(&shift_matrix(field, n, t));
    let s = t.unsigned_abs() as usize;
    let rows = if t >= 0 { s..n } else { 0..n - s };
    diff.submatrix(rows, 0..n).rank()
}

/// All residual ranks for `|t| <= d/2`.
pub fn residual_table(sigma: &Permutation, d: usize) -> BTreeMap<i64, usize> {
    let half = (d / 2) as i64;
    (-half..=half)
        .map(|t| (t, residual_rank(sigma, t)))
        .collect()
}

/// Shifts witnessing the rank formula: `|t| <= d/2` and `r_t <= d - 2|t|`,
/// ordered by `|t|` with the non-negative sign first.
pub fn eligible_shifts(sigma: &Permutation, d: usize) -> Vec<(i64, usize)> {
    let n = sigma.n();
    assert!(n >= 2 * d, "require n >= 2d (got n={n}, d={d})");
    let residuals = residual_table(sigma, d);
    let half = (d / 2) as i64;
    let mut order: Vec<i64> = Vec::new();
    for a in 0..=half {
        order.push(a);
        if a > 0 {
            order.push(-a);
        }
    }
    order
        .into_iter()
        .filter_map(|t| {
            let r_t = residuals[&t];
            (r_t + 2 * t.unsigned_abs() as usize <= d).then_some((t, r_t))
        })
        .collect()
}

/// Generic rank of `[V, PV]` when some shift is eligible. Distinct eligible
/// shifts must agree on `d + r_t + 2|t|`; a disagreement would falsify the
/// rank formula and is surfaced as an error rather than masked.
pub fn predict_rank(sigma: &Permutation, d: usize) -> Result<RankPrediction> {
    let witnesses = eligible_shifts(sigma, d);
    let Some(&(t0, r0)) = witnesses.first() else {
        return Ok(RankPrediction::NotCovered);
    };
    let value = |t: i64, r: usize| d + r + 2 * t.unsigned_abs() as usize;
    let rank = value(t0, r0);
    for &(t, r) in &witnesses[1..] {
        if value(t, r) != rank {
            return Err(Error::WitnessConflict {
                t_a: t0,
                rank_a: rank,
                t_b: t,
                rank_b: value(t, r),
            });
        }
    }
    Ok(RankPrediction::Predicted { rank, witnesses })
}

/// Full USP decision for generic Toeplitz `V`:
///
/// * `r_0 <= d` — holds;
/// * `r_0 > d` and some shift eligible — holds iff `r_t = d - 2|t|`;
/// * no eligible shift — unknown (the deterministic layer never falls back
///   to sampling on its own; consult [`crate::oracle`] explicitly).
pub fn decide_usp(sigma: &Permutation, d: usize) -> Result<ShiftAnalysis> {
    let n = sigma.n();
    let residuals = residual_table(sigma, d);
    let r0 = residuals[&0];
    let prediction = predict_rank(sigma, d)?;
    let eligible = match &prediction {
        RankPrediction::Predicted { witnesses, .. } => witnesses.clone(),
        RankPrediction::NotCovered => Vec::new(),
    };
    let predicted_rank = prediction.rank();

    let (usp, certificate) = if r0 <= d {
        (
            UspVerdict::Holds,
            format!(
                "r0={r0} <= d={d}: the fixed space is large enough; \
                 t=0 is eligible and rank[V,PV] = d+r0 = {}; usp holds generically",
                d + r0
            ),
        )
    } else if let Some(&(t, r_t)) = eligible.first() {
        let slack = d - 2 * t.unsigned_abs() as usize;
        if r_t == slack {
            (
                UspVerdict::Holds,
                format!(
                    "r0={r0} > d={d}; eligible shift t={t} has r_t={r_t} = d-2|t|, \
                     so rank[V,PV] = 2d = {}; usp holds generically",
                    2 * d
                ),
            )
        } else {
            (
                UspVerdict::Fails,
                format!(
                    "r0={r0} > d={d}; eligible shift t={t} has r_t={r_t} < d-2|t|={slack}, \
                     so rank[V,PV] = {} < 2d; usp fails generically",
                    predicted_rank.unwrap_or(0)
                ),
            )
        }
    } else {
        (
            UspVerdict::Unknown,
            format!(
                "r0={r0} > d={d} and no shift with |t| <= d/2 satisfies r_t <= d-2|t|: \
                 the rank formula does not apply; undecided at this layer"
            ),
        )
    };

    Ok(ShiftAnalysis {
        n,
        d,
        r0,
        residuals,
        eligible,
        predicted_rank,
        usp,
        certificate,
    })
}

/// `max(d - r_0, 0)`: the dimension the fixed-space intersection
/// `N(I-P) ∩ C(V)` attains for generic Toeplitz `V`.
pub fn expected_fixed_intersection_dim(sigma: &Permutation, d: usize) -> usize {
    assert!(sigma.n() >= 2 * d, "require n >= 2d");
    d.saturating_sub(r_zero(sigma))
}

/// Closed-form generic rank of `[V, P^t V]` for the forward cyclic shift:
/// `min(2d, d + 2 dist(t))` with `dist` the circular distance of `t` from 0.
pub fn cyclic_rank_formula(t: i64, n: usize, d: usize) -> usize {
    assert!(n >= 2 * d, "require n >= 2d");
    let m = t.rem_euclid(n as i64) as usize;
    let dist = m.min(n - m);
    (2 * d).min(d + 2 * dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::factorial;

    fn example1() -> Permutation {
        Permutation::parse("1 3 4 5 6 2").unwrap()
    }

    fn example3() -> Permutation {
        Permutation::parse("3 1 2 5 6 4").unwrap()
    }

    #[test]
    fn r_zero_known_cases() {
        assert_eq!(r_zero(&Permutation::identity(5)), 0);
        assert_eq!(r_zero(&Permutation::cyclic_shift(6, 1)), 5);
        assert_eq!(r_zero(&example1()), 4);
        assert_eq!(r_zero(&Permutation::transposition(6, 1, 4)), 1);
    }

    #[test]
    fn r_zero_equals_n_minus_cycles_exhaustively() {
        // Matrix route vs cycle-count route over all of S_6.
        for idx in 0..factorial(6) {
            let p = Permutation::unrank(6, idx);
            assert_eq!(r_zero(&p), 6 - p.cycle_count(), "sigma = {p}");
        }
    }

    #[test]
    fn residual_rank_known_cases() {
        assert_eq!(residual_rank(&example1(), 1), 1);
        assert_eq!(residual_rank(&Permutation::identity(6), 0), 0);
        assert_eq!(residual_rank(&example3(), 1), 3);
        assert_eq!(residual_rank(&example3(), -1), 3);
        // A cyclic shift wipes out the whole submatrix: P = J on those rows.
        assert_eq!(residual_rank(&Permutation::cyclic_shift(6, 1), 1), 0);
    }

    #[test]
    fn residual_at_zero_is_r_zero_exhaustively() {
        for idx in 0..factorial(6) {
            let p = Permutation::unrank(6, idx);
            assert_eq!(residual_rank(&p, 0), r_zero(&p));
        }
    }

    #[test]
    fn eligible_shifts_known_cases() {
        let e1 = eligible_shifts(&example1(), 3);
        assert_eq!(e1, vec![(1, 1)]); // r0 = 4 > 3 excludes t=0
        let id = eligible_shifts(&Permutation::identity(6), 3);
        assert_eq!(id, vec![(0, 0)]);
        assert!(eligible_shifts(&example3(), 3).is_empty());
    }

    #[test]
    fn predict_rank_known_cases() {
        match predict_rank(&example1(), 3).unwrap() {
            RankPrediction::Predicted { rank, witnesses } => {
                assert_eq!(rank, 6);
                assert_eq!(witnesses, vec![(1, 1)]);
            }
            other => panic!("unexpected: {other:?}"),
        }
        assert_eq!(
            predict_rank(&Permutation::identity(6), 3).unwrap().rank(),
            Some(3)
        );
        assert!(matches!(
            predict_rank(&example3(), 3).unwrap(),
            RankPrediction::NotCovered
        ));
    }

    #[test]
    fn usp_known_cases() {
        let a = decide_usp(&example1(), 3).unwrap();
        assert_eq!(a.usp, UspVerdict::Holds);
        assert_eq!(a.r0, 4);
        assert_eq!(a.predicted_rank, Some(6));

        let id = decide_usp(&Permutation::identity(6), 3).unwrap();
        assert_eq!(id.usp, UspVerdict::Holds);
        assert_eq!(id.predicted_rank, Some(3));

        let cyc = decide_usp(&Permutation::cyclic_shift(6, 1), 3).unwrap();
        assert_eq!(cyc.usp, UspVerdict::Fails);
        assert_eq!(cyc.predicted_rank, Some(5));

        let e3 = decide_usp(&example3(), 3).unwrap();
        assert_eq!(e3.usp, UspVerdict::Unknown);
        assert_eq!(e3.predicted_rank, None);
    }

    #[test]
    fn eligible_shifts_agree_on_the_predicted_value_exhaustively() {
        for idx in 0..factorial(6) {
            let p = Permutation::unrank(6, idx);
            // Any disagreement comes back as an error.
            predict_rank(&p, 3).unwrap();
        }
    }

    #[test]
    fn fixed_intersection_dim_known_cases() {
        assert_eq!(
            expected_fixed_intersection_dim(&Permutation::identity(6), 3),
            3
        );
        assert_eq!(expected_fixed_intersection_dim(&example1(), 3), 0);
        assert_eq!(
            expected_fixed_intersection_dim(&Permutation::transposition(6, 2, 5), 3),
            2
        );
    }

    #[test]
    fn cyclic_formula_known_cases() {
        assert_eq!(cyclic_rank_formula(2, 6, 3), 6);
        assert_eq!(cyclic_rank_formula(0, 6, 3), 3);
        assert_eq!(cyclic_rank_formula(1, 6, 3), 5);
        // Circular distance: shifting by n-1 is shifting by -1.
        assert_eq!(cyclic_rank_formula(5, 6, 3), 5);
        assert_eq!(cyclic_rank_formula(-1, 6, 3), 5);
        assert_eq!(cyclic_rank_formula(7, 6, 3), 5);
    }

    #[test]
    fn analysis_json_shape() {
        let a = decide_usp(&example1(), 3).unwrap();
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["r0"], 4);
        assert_eq!(v["residuals"]["1"], 1);
        assert_eq!(v["eligible"], serde_json::json!([[1, 1]]));
        assert_eq!(v["predicted_rank"], 6);
        assert_eq!(v["usp"], "holds");
        assert!(v["certificate"].is_string());
    }
}
