//! Desk-scale demonstration of the sensing question itself: plant a signal
//! in a Toeplitz column space, permute its samples, and enumerate every
//! permutation that explains the observation.
//!
//! Everything is exact and noiseless; membership of a candidate signal in
//! the column space is an exact rank test. The enumeration is the
//! brute-force ground truth the theorem layer is compared against.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field::PrimeField;
use crate::matrix::ExactMatrix;
use crate::perm::Permutation;
use crate::toeplitz::ToeplitzSpec;
use crate::{harness, Result};

const ENUMERATION_LIMIT: usize = 8;

/// A planted instance: observation = P (V c), exactly.
#[derive(Clone, Debug, Serialize)]
pub struct SensingInstance {
    pub spec: ToeplitzSpec,
    pub coeffs: Vec<u64>,
    pub sigma: Permutation,
    pub observation: Vec<u64>,
    #[serde(skip)]
    field: PrimeField,
}

/// One acceptable explanation of the observation: a permutation and the
/// in-subspace signal it implies.
#[derive(Clone, Debug, Serialize)]
pub struct Explanation {
    pub sigma: Permutation,
    pub signal: Vec<u64>,
    /// The explanation the instance was built from.
    pub planted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Explanations {
    pub candidates: Vec<Explanation>,
    /// Number of distinct signal vectors among the candidates.
    pub distinct_signals: usize,
}

impl SensingInstance {
    /// Samples a subspace and a coefficient vector, then permutes the
    /// resulting signal. Reproducible from the seed.
    pub fn generate(n: usize, d: usize, sigma: &Permutation, seed: u64, field: PrimeField) -> Self {
        assert!(n >= 2 * d, "require n >= 2d");
        assert_eq!(sigma.n(), n, "permutation size mismatch");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = ToeplitzSpec::sample(n, d, field, &mut rng);
        let coeffs: Vec<u64> = (0..d).map(|_| field.sample(&mut rng).value()).collect();
        Self::plant(spec, coeffs, sigma.clone(), field)
    }

    /// Builds the instance from explicit ingredients.
    pub fn plant(
        spec: ToeplitzSpec,
        coeffs: Vec<u64>,
        sigma: Permutation,
        field: PrimeField,
    ) -> Self {
        assert_eq!(coeffs.len(), spec.d);
        assert_eq!(sigma.n(), spec.n);
        let signal = Self::signal_of(&spec, &coeffs, field);
        let observation = sigma.permute_vec(&signal);
        SensingInstance {
            spec,
            coeffs,
            sigma,
            observation,
            field,
        }
    }

    fn signal_of(spec: &ToeplitzSpec, coeffs: &[u64], field: PrimeField) -> Vec<u64> {
        let v = spec.build(field);
        let c: Vec<_> = coeffs.iter().map(|&x| field.elem(x)).collect();
        v.mul_vec(&c).iter().map(|s| s.value()).collect()
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// The unpermuted signal `V c`.
    pub fn signal(&self) -> Vec<u64> {
        Self::signal_of(&self.spec, &self.coeffs, self.field)
    }

    /// Every permutation under which the observation is explained by some
    /// signal in the column space, with that signal. The planted pair is
    /// always present. Guarded at n = 8 (n! membership tests).
    pub fn enumerate_consistent(&self) -> Result<Explanations> {
        let n = self.spec.n;
        if n > ENUMERATION_LIMIT {
            return Err(crate::Error::GuardExceeded {
                what: "consistency enumeration size",
                limit: ENUMERATION_LIMIT,
                got: n,
            });
        }
        let field = self.field;
        let v = self.spec.build(field);
        let rank_v = v.rank();
        let planted_signal = self.signal();

        let mut candidates = Vec::new();
        let mut signals: HashSet<Vec<u64>> = HashSet::new();
        for sigma in harness::permutations(n)? {
            // Candidate signal w with observation = P' w.
            let w = sigma.unpermute_vec(&self.observation);
            let w_col: Vec<_> = w.iter().map(|&x| field.elem(x)).collect();
            let member = v.hconcat(&ExactMatrix::from_column(field, &w_col)).rank() == rank_v;
            if member {
                signals.insert(w.clone());
                let planted = sigma == self.sigma && w == planted_signal;
                candidates.push(Explanation {
                    sigma,
                    signal: w,
                    planted,
                });
            }
        }
        Ok(Explanations {
            distinct_signals: signals.len(),
            candidates,
        })
    }

    /// Exact check, on this instance's subspace, that the meet of the space
    /// with its image under `sigma_alt` is no bigger than the fixed-space
    /// part: dim(V ∩ P'V) = dim(N(I - P') ∩ V), computed from ranks on both
    /// sides.
    pub fn check_pairwise_usp(&self, sigma_alt: &Permutation) -> bool {
        assert_eq!(sigma_alt.n(), self.spec.n, "permutation size mismatch");
        let field = self.field;
        let v = self.spec.build(field);
        let rank_v = v.rank();
        let p = sigma_alt.matrix(field);

        let dim_meet = 2 * rank_v - v.hconcat(&p.mul(&v)).rank();
        let kernel = ExactMatrix::identity(field, self.spec.n)
            .sub(&p)
            .nullspace_basis();
        let dim_fixed_meet = (kernel.cols() + rank_v).saturating_sub(kernel.hconcat(&v).rank());
        dim_meet == dim_fixed_meet
    }
}
