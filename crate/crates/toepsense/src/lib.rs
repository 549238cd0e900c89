//! Exact linear algebra and combinatorics for unlabeled sensing over Toeplitz
//! column spaces.
//!
//! Given an `n x d` Toeplitz matrix `V` (`n >= 2d`) and a coordinate
//! permutation with matrix `P`, this crate answers two questions about the
//! generic behaviour of the pair:
//!
//! * what is `rank [V, PV]` for generic diagonal values, and
//! * does the unlabeled sensing property (USP) hold, i.e. does
//!   `v1 = P v2` with `v1, v2` in the column space force `v1 = v2`?
//!
//! The deterministic layer ([`analysis`]) answers these from the residual
//! ranks `r_t` of shifted permutation matrices alone. The probabilistic layer
//! ([`oracle`]) measures the same quantities by sampling diagonal values in a
//! large prime field, with one-sided error bounded via Schwartz–Zippel. The
//! symbolic layer ([`sympoly`]) certifies the combinatorial facts behind the
//! rank formulas exactly, over the integers. The [`harness`] module
//! exhaustively cross-validates all of the above over entire symmetric
//! groups and hunts for counterexamples to the covering conjecture.

pub mod analysis;
pub mod demo;
pub mod field;
pub mod fixtures;
pub mod harness;
pub mod matrix;
pub mod oracle;
pub mod perm;
pub mod sympoly;
pub mod toeplitz;

pub use analysis::{RankPrediction, ShiftAnalysis, UspVerdict};
pub use field::{FieldScalar, PrimeField, MERSENNE31, MERSENNE61};
pub use matrix::ExactMatrix;
pub use oracle::OracleConfig;
pub use perm::Permutation;
pub use toeplitz::ToeplitzSpec;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Version tag embedded in every machine-readable report.
pub const SCHEMA: &str = "toepsense/1";

/// Errors for input validation, guard limits and contract violations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("expected {expected} diagonal values for n={n}, d={d}, got {got}")]
    DiagonalCount {
        n: usize,
        d: usize,
        expected: usize,
        got: usize,
    },
    #[error("entry {position} ({token:?}) is not a valid index")]
    PermSyntax { position: usize, token: String },
    #[error("entry {position} is {value}, outside 1..={n}")]
    PermOutOfRange {
        position: usize,
        value: i64,
        n: usize,
    },
    #[error("entry {position} repeats the value {value}: not a bijection")]
    PermNotBijective { position: usize, value: usize },
    #[error("permutation has {got} entries, expected {expected}")]
    PermLength { expected: usize, got: usize },
    #[error("empty permutation")]
    PermEmpty,
    #[error("{what} limited to {limit}, got {got}")]
    GuardExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error("matrix must have full column rank (rank {rank} < {cols} columns)")]
    NotFullColumnRank { rank: usize, cols: usize },
    #[error("matrix rank {rank} exceeds the subspace dimension {d}")]
    RankExceedsDimension { rank: usize, d: usize },
    #[error("eligible shifts disagree on the predicted rank: t={t_a} gives {rank_a}, t={t_b} gives {rank_b}")]
    WitnessConflict {
        t_a: i64,
        rank_a: usize,
        t_b: i64,
        rank_b: usize,
    },
    #[error("the zero polynomial has no initial monomial")]
    ZeroPolynomial,
    #[error("cannot parse {token:?} as a monomial factor")]
    MonomialSyntax { token: String },
    #[error("index sets have different sizes: {left} vs {right}")]
    IndexSetSize { left: usize, right: usize },
    #[error("index set must be strictly increasing at position {position}")]
    IndexSetOrder { position: usize },
    #[error("[V, PV] is square only for n = 2d, got n={n}, d={d}")]
    NotSquareConcat { n: usize, d: usize },
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("checkpoint does not match this run: {0}")]
    CheckpointMismatch(String),
    #[error("checkpoint i/o: {0}")]
    CheckpointIo(#[from] std::io::Error),
    #[error("checkpoint parse: {0}")]
    CheckpointFormat(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
