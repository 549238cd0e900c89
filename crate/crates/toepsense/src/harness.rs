//! Exhaustive verification over S_n at `n = 2d`: every permutation with
//! generic `rank [V, PV] < 2d` must admit an eligible shift.
//!
//! The index space `0..n!` is split into contiguous chunks handed to
//! workers; permutations are recovered by factorial-number-system unranking,
//! so workers share nothing and the merged result is independent of the
//! worker count. Each permutation gets its own oracle seed derived from the
//! base seed and its lexicographic index, making reports reproducible under
//! any scheduling. Long runs persist a checkpoint after every block and can
//! resume from it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, RankPrediction};
use crate::oracle::{self, mix_seed, OracleConfig};
use crate::perm::{factorial, Permutation};
use crate::{Error, Result, SCHEMA};

/// Trial count a candidate counterexample is re-measured with before it is
/// allowed into the report.
pub const ESCALATED_TRIALS: usize = 5;

const ENUMERATION_LIMIT: usize = 12;

/// Execution knobs for [`verify_conjecture`].
#[derive(Clone, Debug)]
pub struct HarnessOptions {
    pub workers: usize,
    /// Fold each permutation with its conjugate under the order-reversing
    /// involution (which preserves both the covering status and the generic
    /// rank) and process only the orbit representative of smaller index,
    /// with weight 2 for two-element orbits. Off by default: the exhaustive
    /// claim is verified permutation by permutation unless asked otherwise.
    pub symmetry: bool,
    pub checkpoint: Option<PathBuf>,
    /// Classification work is committed in blocks of this many indices; the
    /// checkpoint (if any) is rewritten after each block.
    pub checkpoint_every: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            workers: 1,
            symmetry: false,
            checkpoint: None,
            checkpoint_every: 100_000,
        }
    }
}

/// Everything measured about one permutation.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ClassificationRecord {
    /// One-based image.
    pub image: Vec<usize>,
    pub r0: usize,
    pub eligible: Vec<(i64, usize)>,
    pub predicted_rank: Option<usize>,
    pub oracle_rank: usize,
    /// Some shift is eligible, so the rank formula applies.
    pub covered: bool,
    /// Predicted and measured rank agree whenever both exist.
    pub consistent: bool,
}

/// Outcome of an exhaustive run.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct HarnessReport {
    pub schema: String,
    pub n: usize,
    pub d: usize,
    pub total: u64,
    pub covered: u64,
    pub not_covered: u64,
    /// Measured generic rank -> number of permutations.
    pub rank_histogram: BTreeMap<usize, u64>,
    /// Permutations with `oracle_rank < 2d` and no eligible shift. Empty
    /// exactly when the covering conjecture holds at this size.
    pub counterexamples: Vec<ClassificationRecord>,
    /// True when every covered permutation's prediction matched the oracle.
    pub consistent: bool,
    pub conjecture_verified: bool,
    pub seed: u64,
    pub trials: usize,
    pub escalated_trials: usize,
    pub workers: usize,
    pub symmetry: bool,
    /// Present only when symmetry reduction is on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_convention: Option<String>,
    /// One-sided error bound for the whole report: probability that some
    /// reported rank undershoots the generic one.
    pub failure_probability_bound: f64,
    pub elapsed_ms: u64,
}

/// All n! permutations in lexicographic image order. `n` is guarded at 12.
pub fn permutations(n: usize) -> Result<impl Iterator<Item = Permutation>> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded {
            what: "permutation enumeration size",
            limit: ENUMERATION_LIMIT,
            got: n,
        });
    }
    Ok((0..factorial(n as u64)).map(move |idx| Permutation::unrank(n, idx)))
}

/// Classifies one permutation at `n = 2d`. The oracle seed is derived from
/// `cfg.seed` and the permutation's lexicographic index; a measurement below
/// `2d` is repeated with [`ESCALATED_TRIALS`] before being trusted.
pub fn classify(sigma: &Permutation, d: usize, cfg: &OracleConfig) -> Result<ClassificationRecord> {
    let n = sigma.n();
    assert_eq!(n, 2 * d, "classification is defined for n = 2d");
    let per_perm = cfg.with_seed(mix_seed(cfg.seed, sigma.lex_rank()));

    let prediction = analysis::predict_rank(sigma, d)?;
    let (covered, eligible, predicted_rank) = match prediction {
        RankPrediction::Predicted { rank, witnesses } => (true, witnesses, Some(rank)),
        RankPrediction::NotCovered => (false, Vec::new(), None),
    };

    let mut oracle_rank = oracle::rank_vpv(sigma, n, d, &per_perm);
    if oracle_rank < 2 * d {
        let escalated = per_perm.with_trials(ESCALATED_TRIALS.max(per_perm.trials));
        oracle_rank = oracle::rank_vpv(sigma, n, d, &escalated);
    }

    Ok(ClassificationRecord {
        image: sigma.one_based(),
        r0: analysis::r_zero(sigma),
        eligible,
        predicted_rank,
        oracle_rank,
        covered,
        consistent: predicted_rank.is_none_or(|p| p == oracle_rank),
    })
}

/// Partial aggregation, mergeable by concatenation in index order.
#[derive(Clone, Default, Serialize, Deserialize)]
struct Tally {
    covered: u64,
    not_covered: u64,
    rank_histogram: BTreeMap<usize, u64>,
    counterexamples: Vec<ClassificationRecord>,
    inconsistent: u64,
}

impl Tally {
    fn absorb_record(&mut self, record: &ClassificationRecord, d: usize, weight: u64) {
        *self.rank_histogram.entry(record.oracle_rank).or_insert(0) += weight;
        if record.covered {
            self.covered += weight;
        } else {
            self.not_covered += weight;
            if record.oracle_rank < 2 * d {
                self.counterexamples.push(record.clone());
            }
        }
        if !record.consistent {
            self.inconsistent += weight;
        }
    }

    fn merge(&mut self, other: Tally) {
        self.covered += other.covered;
        self.not_covered += other.not_covered;
        for (rank, count) in other.rank_histogram {
            *self.rank_histogram.entry(rank).or_insert(0) += count;
        }
        self.counterexamples.extend(other.counterexamples);
        self.inconsistent += other.inconsistent;
    }
}

fn classify_range(
    range: std::ops::Range<u64>,
    n: usize,
    d: usize,
    cfg: &OracleConfig,
    symmetry: bool,
) -> Result<Tally> {
    let mut tally = Tally::default();
    for idx in range {
        let sigma = Permutation::unrank(n, idx);
        let weight = if symmetry {
            let mirror_idx = sigma.conjugate_by_reversal().lex_rank();
            if mirror_idx < idx {
                continue; // counted at its orbit representative
            }
            if mirror_idx == idx {
                1
            } else {
                2
            }
        } else {
            1
        };
        let record = classify(&sigma, d, cfg)?;
        tally.absorb_record(&record, d, weight);
    }
    Ok(tally)
}

fn classify_block_parallel(
    block: std::ops::Range<u64>,
    n: usize,
    d: usize,
    cfg: &OracleConfig,
    opts: &HarnessOptions,
) -> Result<Tally> {
    let workers = opts.workers.max(1);
    if workers == 1 || block.end - block.start < 2 {
        return classify_range(block, n, d, cfg, opts.symmetry);
    }
    let len = block.end - block.start;
    let chunk = len.div_ceil(workers as u64);
    let ranges: Vec<std::ops::Range<u64>> = (0..workers as u64)
        .map(|w| {
            let start = block.start + w * chunk;
            let end = (start + chunk).min(block.end);
            start..end.max(start)
        })
        .filter(|r| !r.is_empty())
        .collect();

    let partials: Vec<Result<Tally>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| scope.spawn(move || classify_range(r, n, d, cfg, opts.symmetry)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut tally = Tally::default();
    for partial in partials {
        tally.merge(partial?);
    }
    Ok(tally)
}

/// Resumable progress: which prefix of `0..n!` is already tallied.
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    schema: String,
    n: usize,
    d: usize,
    seed: u64,
    trials: usize,
    symmetry: bool,
    next_index: u64,
    tally: Tally,
}

const CHECKPOINT_SCHEMA: &str = "toepsense/checkpoint/1";

fn load_checkpoint(
    path: &Path,
    n: usize,
    d: usize,
    cfg: &OracleConfig,
    symmetry: bool,
) -> Result<Option<(u64, Tally)>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    let cp: Checkpoint = serde_json::from_str(&text)?;
    if cp.schema != CHECKPOINT_SCHEMA {
        return Err(Error::CheckpointMismatch(format!(
            "schema {:?}, expected {CHECKPOINT_SCHEMA:?}",
            cp.schema
        )));
    }
    let expected = (n, d, cfg.seed, cfg.trials, symmetry);
    let found = (cp.n, cp.d, cp.seed, cp.trials, cp.symmetry);
    if expected != found {
        return Err(Error::CheckpointMismatch(format!(
            "(n, d, seed, trials, symmetry) is {found:?}, run wants {expected:?}"
        )));
    }
    Ok(Some((cp.next_index, cp.tally)))
}

fn store_checkpoint(
    path: &Path,
    n: usize,
    d: usize,
    cfg: &OracleConfig,
    symmetry: bool,
    next_index: u64,
    tally: &Tally,
) -> Result<()> {
    let cp = Checkpoint {
        schema: CHECKPOINT_SCHEMA.to_string(),
        n,
        d,
        seed: cfg.seed,
        trials: cfg.trials,
        symmetry,
        next_index,
        tally: tally.clone(),
    };
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string(&cp)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Classifies all `(2d)!` permutations and reports rank statistics,
/// counterexamples to the covering conjecture, and prediction consistency.
/// Deterministic given seed, trial count and symmetry setting; independent
/// of the worker count.
pub fn verify_conjecture(
    d: usize,
    cfg: &OracleConfig,
    opts: &HarnessOptions,
) -> Result<HarnessReport> {
    assert!((2..=5).contains(&d), "supported range is 2 <= d <= 5");
    let n = 2 * d;
    let total = factorial(n as u64);
    let started = Instant::now();

    let (mut next_index, mut tally) = match &opts.checkpoint {
        Some(path) => {
            load_checkpoint(path, n, d, cfg, opts.symmetry)?.unwrap_or((0, Tally::default()))
        }
        None => (0, Tally::default()),
    };

    let block_size = opts.checkpoint_every.max(1);
    while next_index < total {
        let block = next_index..(next_index + block_size).min(total);
        let partial = classify_block_parallel(block.clone(), n, d, cfg, opts)?;
        tally.merge(partial);
        next_index = block.end;
        if let Some(path) = &opts.checkpoint {
            store_checkpoint(path, n, d, cfg, opts.symmetry, next_index, &tally)?;
        }
    }

    tally.counterexamples.sort_by_key(|r| r.image.clone());
    let consistent = tally.inconsistent == 0;
    let conjecture_verified = tally.counterexamples.is_empty();
    Ok(HarnessReport {
        schema: SCHEMA.to_string(),
        n,
        d,
        total,
        covered: tally.covered,
        not_covered: tally.not_covered,
        rank_histogram: tally.rank_histogram,
        counterexamples: tally.counterexamples,
        consistent,
        conjecture_verified,
        seed: cfg.seed,
        trials: cfg.trials,
        escalated_trials: ESCALATED_TRIALS.max(cfg.trials),
        workers: opts.workers,
        symmetry: opts.symmetry,
        orbit_convention: opts.symmetry.then(|| {
            "orbit representative = smaller lexicographic index under conjugation by i -> n+1-i"
                .to_string()
        }),
        failure_probability_bound: (total as f64) * cfg.failure_probability_bound(n),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_contract() {
        let all: Vec<_> = permutations(3).unwrap().collect();
        assert_eq!(all.len(), 6);
        assert!(all[0].is_identity());
        assert_eq!(all[5].one_based(), vec![3, 2, 1]);
        assert_eq!(permutations(6).unwrap().count(), 720);
        assert!(matches!(
            permutations(13),
            Err(Error::GuardExceeded { got: 13, .. })
        ));
    }

    #[test]
    fn classify_known_cases() {
        let cfg = OracleConfig::default();
        let e1 = classify(&Permutation::parse("1 3 4 5 6 2").unwrap(), 3, &cfg).unwrap();
        assert!(e1.covered);
        assert_eq!(e1.predicted_rank, Some(6));
        assert_eq!(e1.oracle_rank, 6);
        assert!(e1.consistent);

        let e3 = classify(&Permutation::parse("3 1 2 5 6 4").unwrap(), 3, &cfg).unwrap();
        assert!(!e3.covered);
        assert_eq!(e3.oracle_rank, 6); // not a counterexample
        assert!(e3.consistent);

        let id = classify(&Permutation::identity(6), 3, &cfg).unwrap();
        assert!(id.covered);
        assert_eq!(id.predicted_rank, Some(3));
        assert_eq!(id.oracle_rank, 3);
    }

    #[test]
    fn d2_has_no_counterexamples() {
        let report =
            verify_conjecture(2, &OracleConfig::default(), &HarnessOptions::default()).unwrap();
        assert_eq!(report.total, 24);
        assert!(report.conjecture_verified);
        assert!(report.consistent);
        assert_eq!(report.covered + report.not_covered, 24);
        assert_eq!(report.rank_histogram.values().sum::<u64>(), 24);
    }

    #[test]
    fn d3_has_no_counterexamples_and_is_worker_independent() {
        let cfg = OracleConfig::default();
        let single = verify_conjecture(3, &cfg, &HarnessOptions::default()).unwrap();
        assert_eq!(single.total, 720);
        assert!(single.conjecture_verified);
        assert!(single.consistent);
        assert_eq!(single.rank_histogram.values().sum::<u64>(), 720);

        let threaded_opts = HarnessOptions {
            workers: 4,
            ..Default::default()
        };
        let threaded = verify_conjecture(3, &cfg, &threaded_opts).unwrap();

        // Identical modulo wall time.
        let mut a = single.clone();
        let mut b = threaded.clone();
        a.elapsed_ms = 0;
        b.elapsed_ms = 0;
        b.workers = a.workers;
        assert_eq!(a, b);
    }

    #[test]
    fn reports_are_deterministic_for_a_fixed_seed() {
        let cfg = OracleConfig::default().with_seed(99);
        let opts = HarnessOptions::default();
        let mut a = verify_conjecture(2, &cfg, &opts).unwrap();
        let mut b = verify_conjecture(2, &cfg, &opts).unwrap();
        a.elapsed_ms = 0;
        b.elapsed_ms = 0;
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn symmetry_reduction_matches_plain_run() {
        let cfg = OracleConfig::default();
        let plain = verify_conjecture(3, &cfg, &HarnessOptions::default()).unwrap();
        let sym_opts = HarnessOptions {
            symmetry: true,
            ..Default::default()
        };
        let folded = verify_conjecture(3, &cfg, &sym_opts).unwrap();
        assert_eq!(folded.covered, plain.covered);
        assert_eq!(folded.not_covered, plain.not_covered);
        assert_eq!(folded.rank_histogram, plain.rank_histogram);
        assert_eq!(folded.counterexamples.len(), plain.counterexamples.len());
        assert!(folded.orbit_convention.is_some());
    }

    #[test]
    fn checkpoint_resume_reproduces_a_clean_run() {
        let cfg = OracleConfig::default().with_seed(7);
        let dir = std::env::temp_dir().join(format!("toepsense-cp-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("d2.checkpoint.json");
        let _ = std::fs::remove_file(&path);

        // Simulate an interrupted run: commit only the first two blocks.
        let n = 4;
        let mut tally = Tally::default();
        for block in [0..10u64, 10..20] {
            let partial = classify_range(block.clone(), n, 2, &cfg, false).unwrap();
            tally.merge(partial);
            store_checkpoint(&path, n, 2, &cfg, false, block.end, &tally).unwrap();
        }

        // Resume and compare against an uninterrupted run.
        let opts = HarnessOptions {
            checkpoint: Some(path.clone()),
            checkpoint_every: 10,
            ..Default::default()
        };
        let resumed = verify_conjecture(2, &cfg, &opts).unwrap();
        let clean = verify_conjecture(2, &cfg, &HarnessOptions::default()).unwrap();
        assert_eq!(resumed.rank_histogram, clean.rank_histogram);
        assert_eq!(resumed.covered, clean.covered);
        assert_eq!(resumed.counterexamples, clean.counterexamples);

        // A checkpoint from different settings is refused.
        let other = cfg.with_seed(8);
        let mismatch = load_checkpoint(&path, n, 2, &other, false);
        assert!(matches!(mismatch, Err(Error::CheckpointMismatch(_))));

        let _ = std::fs::remove_file(&path);
        let _ = std::fs::remove_dir(&dir);
    }

    #[test]
    fn covered_predictions_match_the_oracle_exhaustively_d3() {
        // Re-verifies the rank formula over all of S_6 and checks report
        // bookkeeping in one pass.
        let report =
            verify_conjecture(3, &OracleConfig::default(), &HarnessOptions::default()).unwrap();
        assert!(report.consistent);
        // Identity is the only permutation with rank d.
        assert_eq!(report.rank_histogram.get(&3), Some(&1));
        // Every rank is at least d.
        assert!(report.rank_histogram.keys().all(|&r| r >= 3));
    }
}
