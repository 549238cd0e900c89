//! Randomized measurement of generic ranks and intersection dimensions.
//!
//! "Generic Toeplitz" is realized by sampling the diagonal values uniformly
//! in F_p. A sampled rank can only undershoot the generic rank
//! (specialization never raises rank), so ranks are maxima over trials and
//! intersection dimensions the corresponding minima; repeated sampling is
//! strictly error-reducing. Results are probabilistic with one-sided
//! failure probability at most `(n/p)^trials` per reported rank.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::r_zero;
use crate::field::PrimeField;
use crate::matrix::ExactMatrix;
use crate::perm::Permutation;
use crate::toeplitz::ToeplitzSpec;
use crate::{Error, Result, DEFAULT_SEED};

use itertools::Itertools;

/// Trial count, base seed and field for one batch of measurements.
///
/// Callers running in parallel must use disjoint seed streams; the intended
/// contract is `seed = mix_seed(base, task_index)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OracleConfig {
    pub trials: usize,
    pub seed: u64,
    pub field: PrimeField,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            trials: 3,
            seed: DEFAULT_SEED,
            field: PrimeField::mersenne61(),
        }
    }
}

impl OracleConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        OracleConfig { seed, ..self }
    }

    pub fn with_trials(self, trials: usize) -> Self {
        assert!(trials >= 1, "at least one trial");
        OracleConfig { trials, ..self }
    }

    /// Rng for one trial. Trial streams form a prefix-stable sequence:
    /// raising `trials` only appends samples, it never changes earlier ones.
    fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix_seed(self.seed, trial as u64))
    }

    /// Upper bound on the probability that every trial missed the generic
    /// rank, for matrices whose minors have degree at most `deg`.
    pub fn failure_probability_bound(&self, deg: usize) -> f64 {
        (deg as f64 / self.field.modulus() as f64).powi(self.trials as i32)
    }
}

/// SplitMix64 finalizer over `base` and `salt`; the seed-derivation contract
/// used everywhere (per-trial and per-task streams).
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_v(n: usize, d: usize, cfg: &OracleConfig, trial: usize) -> ExactMatrix {
    let mut rng = cfg.trial_rng(trial);
    ToeplitzSpec::sample(n, d, cfg.field, &mut rng).build(cfg.field)
}

/// Generic `rank [V, PV]`: max over sampled `V`.
pub fn rank_vpv(sigma: &Permutation, n: usize, d: usize, cfg: &OracleConfig) -> usize {
    assert!(n >= d, "require n >= d");
    assert_eq!(sigma.n(), n, "permutation size mismatch");
    (0..cfg.trials)
        .map(|trial| {
            let v = sample_v(n, d, cfg, trial);
            let pv = sigma.matrix(cfg.field).mul(&v);
            v.hconcat(&pv).rank()
        })
        .max()
        .expect("at least one trial")
}

/// `(dim(V ∩ PV), dim(N(I-P) ∩ V))` for generic Toeplitz `V`, both derived
/// from ranks on a sample shared per trial so the bookkeeping is consistent.
pub fn intersection_dims(
    sigma: &Permutation,
    n: usize,
    d: usize,
    cfg: &OracleConfig,
) -> (usize, usize) {
    assert!(n >= d, "require n >= d");
    let field = cfg.field;
    let p = sigma.matrix(field);
    let kernel = ExactMatrix::identity(field, n).sub(&p).nullspace_basis();
    let dim_fixed_space = kernel.cols();

    let mut max_rank_vpv = 0;
    let mut max_rank_kv = 0;
    for trial in 0..cfg.trials {
        let v = sample_v(n, d, cfg, trial);
        max_rank_vpv = max_rank_vpv.max(v.hconcat(&p.mul(&v)).rank());
        max_rank_kv = max_rank_kv.max(kernel.hconcat(&v).rank());
    }
    let dim_meet = (2 * d).saturating_sub(max_rank_vpv);
    let dim_fixed_meet = (dim_fixed_space + d).saturating_sub(max_rank_kv);
    (dim_meet, dim_fixed_meet)
}

/// USP measured directly: `rank [V, PV] = 2d - max(d - r0, 0)`.
pub fn usp_probable(sigma: &Permutation, n: usize, d: usize, cfg: &OracleConfig) -> bool {
    assert!(n >= 2 * d, "require n >= 2d");
    let r0 = r_zero(sigma);
    rank_vpv(sigma, n, d, cfg) == 2 * d - d.saturating_sub(r0)
}

/// Checks `rank [W, V] = min(d0 + d, n)` on every trial, for a fixed
/// full-column-rank `W` and sampled Toeplitz `V`.
pub fn augmented_rank_holds(w: &ExactMatrix, d: usize, cfg: &OracleConfig) -> Result<bool> {
    let (n, d0) = (w.rows(), w.cols());
    let rank_w = w.rank();
    if rank_w != d0 {
        return Err(Error::NotFullColumnRank {
            rank: rank_w,
            cols: d0,
        });
    }
    let target = (d0 + d).min(n);
    Ok((0..cfg.trials).all(|trial| {
        let v = sample_v(n, d, cfg, trial);
        w.hconcat(&v).rank() == target
    }))
}

/// Checks that some `r x d` row-submatrix of `Q V` (with `r = rank Q` and
/// `V` sampled Toeplitz) has all of its `C(d, r)` maximal minors non-zero,
/// on every trial.
pub fn all_minors_nonzero(q: &ExactMatrix, d: usize, cfg: &OracleConfig) -> Result<bool> {
    let r = q.rank();
    if r > d {
        return Err(Error::RankExceedsDimension { rank: r, d });
    }
    if r == 0 {
        // The empty submatrix has no minors to vanish.
        return Ok(true);
    }
    let n = q.cols();
    Ok((0..cfg.trials).all(|trial| {
        let v = sample_v(n, d, cfg, trial);
        let qv = q.mul(&v);
        (0..qv.rows()).combinations(r).any(|rows| {
            let sub = qv.select_rows(&rows);
            (0..d).combinations(r).all(|cols| {
                let minor = ExactMatrix::from_fn(cfg.field, r, r, |i, j| sub.get(i, cols[j]));
                !minor.det().is_zero()
            })
        })
    }))
}
