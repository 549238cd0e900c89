//! `toepsense`: analyses of unlabeled sensing over Toeplitz column spaces.
//!
//! Every subcommand prints one JSON document (schema `toepsense/1`) to
//! stdout and a short human summary to stderr. Exit codes: 0 on
//! success/verified, 2 when a verification ran and failed (fixture mismatch,
//! counterexample found), 1 on usage or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use toepsense::analysis::{self, UspVerdict};
use toepsense::demo::SensingInstance;
use toepsense::fixtures;
use toepsense::harness::{self, HarnessOptions};
use toepsense::oracle::{self, OracleConfig};
use toepsense::sympoly;
use toepsense::{Permutation, PrimeField, ShiftAnalysis, DEFAULT_SEED, MERSENNE61, SCHEMA};

#[derive(Parser)]
#[command(
    name = "toepsense",
    version,
    about = "Unlabeled sensing over Toeplitz column spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Sampling configuration, shared by the probabilistic subcommands.
/// Precedence: flag > environment variable > default.
#[derive(Args, Clone)]
struct CommonOpts {
    /// Prime modulus for the exact arithmetic
    #[arg(long, env = "TOEPSENSE_PRIME", default_value_t = MERSENNE61)]
    prime: u64,
    /// Sampling trials per rank measurement
    #[arg(long, env = "TOEPSENSE_TRIALS", default_value_t = 3)]
    trials: usize,
    /// Base seed for all sampling
    #[arg(long, env = "TOEPSENSE_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl CommonOpts {
    fn oracle_config(&self) -> Result<OracleConfig, CliError> {
        if self.trials < 1 {
            return Err("at least one trial is required".into());
        }
        Ok(OracleConfig {
            trials: self.trials,
            seed: self.seed,
            field: PrimeField::new(self.prime)?,
        })
    }
}

#[derive(Args, Clone)]
struct PermArgs {
    /// Ambient dimension n
    #[arg(long)]
    n: usize,
    /// Subspace dimension d (requires n >= 2d)
    #[arg(long)]
    d: usize,
    /// Permutation in one-line image notation, e.g. "1 3 4 5 6 2"
    #[arg(long)]
    perm: String,
}

impl PermArgs {
    fn parse_permutation(&self) -> Result<Permutation, CliError> {
        if self.perm.contains('(') {
            return Err("cycle notation is not accepted; use one-line image \
                        notation such as \"1 3 4 5 6 2\""
                .into());
        }
        let sigma = Permutation::parse(&self.perm)?;
        if sigma.n() != self.n {
            return Err(toepsense::Error::PermLength {
                expected: self.n,
                got: sigma.n(),
            }
            .into());
        }
        Ok(sigma)
    }

    fn require_theory_dims(&self) -> Result<(), CliError> {
        if self.d < 1 || self.n < 2 * self.d {
            return Err(format!("require n >= 2d >= 2, got n={} and d={}", self.n, self.d).into());
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Residual ranks, predicted rank and USP verdict, cross-checked by sampling
    Analyze {
        #[command(flatten)]
        perm: PermArgs,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Deterministic USP verdict only (no sampling)
    Usp {
        #[command(flatten)]
        perm: PermArgs,
    },
    /// Sampled generic rank of [V, PV] and intersection dimensions
    OracleRank {
        #[command(flatten)]
        perm: PermArgs,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Symbolic determinant of [U, PU] at n = 2d: term count, initial monomial
    Symdet {
        #[command(flatten)]
        perm: PermArgs,
        /// Include the full term list in the output
        #[arg(long)]
        full: bool,
    },
    /// Exhaustively verify the covering conjecture over S_{2d}
    Conjecture {
        /// Subspace dimension, 2..=5 (n = 2d)
        #[arg(long)]
        d: usize,
        /// Worker threads over disjoint index ranges
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Checkpoint file: written each block, resumed from when present
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Fold permutations with their reversal conjugates (halves the work)
        #[arg(long)]
        symmetry: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Plant a signal, permute it, enumerate all consistent explanations
    Demo {
        #[command(flatten)]
        perm: PermArgs,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the pinned example fixtures and compare every expectation
    Fixtures {
        /// Fixture name, or "all"
        #[arg(long, default_value = "all")]
        run: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

type CliError = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version print to stdout and are not errors.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn emit(value: &impl Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

#[derive(Serialize)]
struct OracleBlock {
    rank: usize,
    dim_meet: usize,
    dim_fixed_meet: usize,
    expected_fixed_dim: usize,
    usp: bool,
    /// Whether the sampled verdict confirms the deterministic one; absent
    /// when the deterministic layer was inconclusive.
    #[serde(skip_serializing_if = "Option::is_none")]
    agrees_with_analysis: Option<bool>,
    probabilistic: bool,
    failure_probability_bound: f64,
}

fn oracle_block(
    sigma: &Permutation,
    n: usize,
    d: usize,
    cfg: &OracleConfig,
    shift_analysis: &ShiftAnalysis,
) -> OracleBlock {
    let rank = oracle::rank_vpv(sigma, n, d, cfg);
    let (dim_meet, dim_fixed_meet) = oracle::intersection_dims(sigma, n, d, cfg);
    let usp = oracle::usp_probable(sigma, n, d, cfg);
    let agrees_with_analysis = match shift_analysis.usp {
        UspVerdict::Holds => Some(usp),
        UspVerdict::Fails => Some(!usp),
        UspVerdict::Unknown => None,
    };
    OracleBlock {
        rank,
        dim_meet,
        dim_fixed_meet,
        expected_fixed_dim: analysis::expected_fixed_intersection_dim(sigma, d),
        usp,
        agrees_with_analysis,
        probabilistic: true,
        failure_probability_bound: cfg.failure_probability_bound(n),
    }
}

fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Analyze { perm, common } => {
            perm.require_theory_dims()?;
            let sigma = perm.parse_permutation()?;
            let cfg = common.oracle_config()?;
            let shift_analysis = analysis::decide_usp(&sigma, perm.d)?;
            let oracle = oracle_block(&sigma, perm.n, perm.d, &cfg, &shift_analysis);

            #[derive(Serialize)]
            struct Report<'a> {
                schema: &'a str,
                command: &'a str,
                n: usize,
                d: usize,
                perm: Vec<usize>,
                prime: u64,
                seed: u64,
                trials: usize,
                analysis: &'a ShiftAnalysis,
                oracle: &'a OracleBlock,
            }
            emit(&Report {
                schema: SCHEMA,
                command: "analyze",
                n: perm.n,
                d: perm.d,
                perm: sigma.one_based(),
                prime: cfg.field.modulus(),
                seed: cfg.seed,
                trials: cfg.trials,
                analysis: &shift_analysis,
                oracle: &oracle,
            });
            eprintln!(
                "analyze: sigma = [{}], r0 = {}, eligible = {:?}, predicted rank = {:?}, \
                 usp = {:?}, oracle rank = {}",
                sigma,
                shift_analysis.r0,
                shift_analysis.eligible,
                shift_analysis.predicted_rank,
                shift_analysis.usp,
                oracle.rank
            );
            Ok(true)
        }

        Command::Usp { perm } => {
            perm.require_theory_dims()?;
            let sigma = perm.parse_permutation()?;
            let shift_analysis = analysis::decide_usp(&sigma, perm.d)?;

            #[derive(Serialize)]
            struct Report<'a> {
                schema: &'a str,
                command: &'a str,
                n: usize,
                d: usize,
                perm: Vec<usize>,
                usp: UspVerdict,
                analysis: &'a ShiftAnalysis,
            }
            emit(&Report {
                schema: SCHEMA,
                command: "usp",
                n: perm.n,
                d: perm.d,
                perm: sigma.one_based(),
                usp: shift_analysis.usp,
                analysis: &shift_analysis,
            });
            eprintln!(
                "usp: {:?} ({})",
                shift_analysis.usp, shift_analysis.certificate
            );
            Ok(true)
        }

        Command::OracleRank { perm, common } => {
            perm.require_theory_dims()?;
            let sigma = perm.parse_permutation()?;
            let cfg = common.oracle_config()?;
            let shift_analysis = analysis::decide_usp(&sigma, perm.d)?;
            let oracle = oracle_block(&sigma, perm.n, perm.d, &cfg, &shift_analysis);

            #[derive(Serialize)]
            struct Report<'a> {
                schema: &'a str,
                command: &'a str,
                n: usize,
                d: usize,
                perm: Vec<usize>,
                prime: u64,
                seed: u64,
                trials: usize,
                #[serde(flatten)]
                oracle: &'a OracleBlock,
            }
            emit(&Report {
                schema: SCHEMA,
                command: "oracle-rank",
                n: perm.n,
                d: perm.d,
                perm: sigma.one_based(),
                prime: cfg.field.modulus(),
                seed: cfg.seed,
                trials: cfg.trials,
                oracle: &oracle,
            });
            eprintln!(
                "oracle-rank: rank [V, PV] = {} (dim meet = {}, fixed meet = {}, usp = {})",
                oracle.rank, oracle.dim_meet, oracle.dim_fixed_meet, oracle.usp
            );
            Ok(true)
        }

        Command::Symdet { perm, full } => {
            let sigma = perm.parse_permutation()?;
            let out = sympoly::symbolic_det_vpv(&sigma, perm.n, perm.d)?;
            let (initial_monomial, leading_coeff) = match &out.initial {
                Some((m, c)) => (Value::String(m.to_string()), sympoly::coefficient_json(c)),
                None => (Value::Null, Value::Null),
            };

            #[derive(Serialize)]
            struct Report<'a> {
                schema: &'a str,
                command: &'a str,
                n: usize,
                d: usize,
                perm: Vec<usize>,
                nonzero: bool,
                term_count: usize,
                initial_monomial: Value,
                leading_coeff: Value,
                #[serde(skip_serializing_if = "Option::is_none")]
                determinant: Option<Value>,
            }
            emit(&Report {
                schema: SCHEMA,
                command: "symdet",
                n: perm.n,
                d: perm.d,
                perm: sigma.one_based(),
                nonzero: !out.det.is_zero(),
                term_count: out.det.num_terms(),
                initial_monomial: initial_monomial.clone(),
                leading_coeff,
                determinant: full.then(|| out.det.to_json_terms()),
            });
            eprintln!(
                "symdet: det[U, PU] has {} terms; initial monomial {}",
                out.det.num_terms(),
                initial_monomial
            );
            Ok(true)
        }

        Command::Conjecture {
            d,
            workers,
            resume,
            symmetry,
            common,
        } => {
            if !(2..=5).contains(&d) {
                return Err(format!("--d must be in 2..=5, got {d}").into());
            }
            if workers < 1 {
                return Err("--workers must be at least 1".into());
            }
            let cfg = common.oracle_config()?;
            let opts = HarnessOptions {
                workers,
                symmetry,
                checkpoint: resume,
                ..HarnessOptions::default()
            };
            let report = harness::verify_conjecture(d, &cfg, &opts)?;
            let mut value = serde_json::to_value(&report)?;
            value
                .as_object_mut()
                .expect("report is an object")
                .insert("command".into(), json!("conjecture"));
            emit(&value);
            eprintln!(
                "conjecture d={d}: {} permutations, {} covered, {} not covered, \
                 {} counterexamples, consistent = {}, {} ms",
                report.total,
                report.covered,
                report.not_covered,
                report.counterexamples.len(),
                report.consistent,
                report.elapsed_ms
            );
            Ok(report.conjecture_verified && report.consistent)
        }

        Command::Demo { perm, common } => {
            perm.require_theory_dims()?;
            let sigma = perm.parse_permutation()?;
            let cfg = common.oracle_config()?;
            let instance = SensingInstance::generate(perm.n, perm.d, &sigma, cfg.seed, cfg.field);
            let found = instance.enumerate_consistent()?;
            let shift_analysis = analysis::decide_usp(&sigma, perm.d)?;

            #[derive(Serialize)]
            struct Report<'a> {
                schema: &'a str,
                command: &'a str,
                n: usize,
                d: usize,
                perm: Vec<usize>,
                prime: u64,
                seed: u64,
                instance: &'a SensingInstance,
                candidates: usize,
                distinct_signals: usize,
                planted_found: bool,
                explanations: Vec<Value>,
                usp_analysis: &'a ShiftAnalysis,
            }
            emit(&Report {
                schema: SCHEMA,
                command: "demo",
                n: perm.n,
                d: perm.d,
                perm: sigma.one_based(),
                prime: cfg.field.modulus(),
                seed: cfg.seed,
                instance: &instance,
                candidates: found.candidates.len(),
                distinct_signals: found.distinct_signals,
                planted_found: found.candidates.iter().any(|c| c.planted),
                explanations: found
                    .candidates
                    .iter()
                    .map(|c| {
                        json!({
                            "perm": c.sigma.one_based(),
                            "signal": c.signal,
                            "planted": c.planted,
                        })
                    })
                    .collect(),
                usp_analysis: &shift_analysis,
            });
            eprintln!(
                "demo: {} consistent explanation(s), {} distinct signal(s); usp verdict {:?}",
                found.candidates.len(),
                found.distinct_signals,
                shift_analysis.usp
            );
            Ok(true)
        }

        Command::Fixtures { run, common } => {
            let cfg = common.oracle_config()?;
            let runs = if run == "all" {
                fixtures::run_all(&cfg)?.0
            } else {
                vec![fixtures::run_fixture(&fixtures::load_fixture(&run)?, &cfg)?]
            };
            let all_pass = runs.iter().all(|r| r.pass);

            #[derive(Serialize)]
            struct Report<'a> {
                schema: &'a str,
                command: &'a str,
                results: &'a [fixtures::FixtureRun],
                all_pass: bool,
            }
            emit(&Report {
                schema: SCHEMA,
                command: "fixtures",
                results: &runs,
                all_pass,
            });
            for fixture_run in &runs {
                eprintln!(
                    "fixture {}: {}",
                    fixture_run.name,
                    if fixture_run.pass { "pass" } else { "FAIL" }
                );
                for note in &fixture_run.notes {
                    eprintln!("  note: {note}");
                }
                for check in fixture_run.checks.iter().filter(|c| !c.pass) {
                    eprintln!(
                        "  {}: expected {} got {}",
                        check.field, check.expected, check.actual
                    );
                }
            }
            Ok(all_pass)
        }
    }
}
