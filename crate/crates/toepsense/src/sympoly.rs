//! Exact symbolic layer: sparse integer polynomials in the diagonal
//! variables `x_k`, `k` any integer, with the lexicographic order induced by
//! `x_a > x_b` whenever `a > b`.
//!
//! The variables are the diagonals of an infinite Toeplitz array, one
//! namespace shared with the numeric layer's diagonal index `k = i - j`.
//! Determinants are expanded with the Leibniz rule (guarded at dimension
//! 10), which is all these certification jobs need: the structural fact
//! being certified is that the initial monomial of any Toeplitz minor is
//! its anti-diagonal product, distinct minors having distinct initial
//! monomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use itertools::Itertools;

use crate::field::{FieldScalar, PrimeField};
use crate::perm::Permutation;
use crate::{Error, Result};

const LEIBNIZ_DIM_LIMIT: usize = 10;
const CERTIFY_WORK_LIMIT: u64 = 10_000_000;

/// A power product of variables, keyed by variable index; exponents are
/// always positive.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct Monomial {
    exponents: BTreeMap<i64, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(k: i64) -> Self {
        Monomial {
            exponents: BTreeMap::from([(k, 1)]),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, u32)>) -> Self {
        let mut exponents = BTreeMap::new();
        for (k, e) in pairs {
            if e > 0 {
                *exponents.entry(k).or_insert(0) += e;
            }
        }
        Monomial { exponents }
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.values().sum()
    }

    pub fn exponent(&self, k: i64) -> u32 {
        self.exponents.get(&k).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut exponents = self.exponents.clone();
        for (&k, &e) in &other.exponents {
            *exponents.entry(k).or_insert(0) += e;
        }
        Monomial { exponents }
    }

    pub fn exponents(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.exponents.iter().map(|(&k, &e)| (k, e))
    }

    /// Parses the display form: `"x_5^2*x_3*x_-1"`, or `"1"` for the empty
    /// product.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "1" {
            return Ok(Monomial::one());
        }
        let mut pairs = Vec::new();
        for part in text.split('*') {
            let bad = || Error::MonomialSyntax {
                token: part.to_string(),
            };
            let rest = part.strip_prefix("x_").ok_or_else(bad)?;
            let (var, exp) = match rest.split_once('^') {
                Some((v, e)) => (v, e.parse::<u32>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let k = var.parse::<i64>().map_err(|_| bad())?;
            pairs.push((k, exp));
        }
        Ok(Monomial::from_pairs(pairs))
    }

    fn eval(&self, field: PrimeField, assign: &impl Fn(i64) -> FieldScalar) -> FieldScalar {
        let mut acc = field.one();
        for (&k, &e) in &self.exponents {
            acc = field.mul(acc, field.pow(assign(k), e as u64));
        }
        acc
    }
}

impl Ord for Monomial {
    /// Lexicographic: scan variable indices downward from the largest; the
    /// first index where the exponents differ decides, larger exponent wins.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let mut a = self.exponents.iter().rev().peekable();
        let mut b = other.exponents.iter().rev().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Equal,
                (Some(_), None) => return Greater,
                (None, Some(_)) => return Less,
                (Some(&(&ka, &ea)), Some(&(&kb, &eb))) => {
                    if ka > kb {
                        return Greater;
                    }
                    if kb > ka {
                        return Less;
                    }
                    match ea.cmp(&eb) {
                        Equal => {
                            a.next();
                            b.next();
                        }
                        decided => return decided,
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    /// Descending variable order, e.g. `x_5^2*x_3*x_1*x_0*x_-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exponents
            .iter()
            .rev()
            .map(|(&k, &e)| {
                if e == 1 {
                    format!("x_{k}")
                } else {
                    format!("x_{k}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Integer-coefficient sparse polynomial; no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SparsePolynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

impl SparsePolynomial {
    pub fn zero() -> Self {
        SparsePolynomial::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_term(Monomial::one(), c)
    }

    pub fn from_term(m: Monomial, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SparsePolynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        SparsePolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = SparsePolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    /// The largest monomial and its coefficient.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.last_key_value()
    }

    /// Substitutes field values for the variables.
    pub fn eval(&self, field: PrimeField, assign: impl Fn(i64) -> FieldScalar) -> FieldScalar {
        let p = BigInt::from(field.modulus());
        let mut acc = field.zero();
        for (m, c) in &self.terms {
            let c_mod = ((c % &p) + &p) % &p;
            let c_f = field.elem(c_mod.to_u64().expect("reduced coefficient fits u64"));
            acc = field.add(acc, field.mul(c_f, m.eval(field, &assign)));
        }
        acc
    }

    /// JSON as a list of `{coeff, exponents: {k: e}}`, largest monomial
    /// first.
    pub fn to_json_terms(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| serde_json::json!({ "coeff": coefficient_json(c), "exponents": m }))
            .collect();
        serde_json::Value::Array(terms)
    }
}

impl fmt::Debug for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| format!("{c}*{m}"))
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// Renders a coefficient as a JSON number when it fits in an `i64`, as a
/// decimal string otherwise.
pub fn coefficient_json(c: &BigInt) -> serde_json::Value {
    match c.to_i64() {
        Some(v) => serde_json::json!(v),
        None => serde_json::json!(c.to_string()),
    }
}

/// A matrix whose every entry is a single variable `x_k`; entries are the
/// variable indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolicMatrix {
    rows: usize,
    cols: usize,
    vars: Vec<i64>,
}

impl SymbolicMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut var: impl FnMut(usize, usize) -> i64) -> Self {
        let mut vars = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                vars.push(var(i, j));
            }
        }
        SymbolicMatrix { rows, cols, vars }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Variable index at `(i, j)`, zero-based.
    pub fn var(&self, i: usize, j: usize) -> i64 {
        self.vars[i * self.cols + j]
    }

    /// Numeric matrix under a variable assignment.
    pub fn eval(
        &self,
        field: PrimeField,
        assign: impl Fn(i64) -> FieldScalar,
    ) -> crate::ExactMatrix {
        crate::ExactMatrix::from_fn(field, self.rows, self.cols, |i, j| assign(self.var(i, j)))
    }
}

fn validate_strictly_increasing(set: &[i64]) -> Result<()> {
    for (pos, w) in set.windows(2).enumerate() {
        if w[0] >= w[1] {
            return Err(Error::IndexSetOrder { position: pos + 1 });
        }
    }
    Ok(())
}

/// Submatrix of the infinite Toeplitz array: entry `(a, b)` is the variable
/// `x_{rows[a] - cols[b]}`.
pub fn symbolic_toeplitz(row_set: &[i64], col_set: &[i64]) -> Result<SymbolicMatrix> {
    validate_strictly_increasing(row_set)?;
    validate_strictly_increasing(col_set)?;
    Ok(SymbolicMatrix::from_fn(
        row_set.len(),
        col_set.len(),
        |i, j| row_set[i] - col_set[j],
    ))
}

/// Exact determinant as a signed sum over permutations, via Heap's
/// algorithm. Guarded at dimension 10 (10! terms).
pub fn leibniz_det(m: &SymbolicMatrix) -> Result<SparsePolynomial> {
    assert_eq!(m.rows(), m.cols(), "determinant of non-square matrix");
    let n = m.rows();
    if n > LEIBNIZ_DIM_LIMIT {
        return Err(Error::GuardExceeded {
            what: "Leibniz determinant dimension",
            limit: LEIBNIZ_DIM_LIMIT,
            got: n,
        });
    }
    if n == 0 {
        return Ok(SparsePolynomial::constant(1));
    }

    let mut det = SparsePolynomial::zero();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut sign = 1i32;
    let one = BigInt::from(1);
    let minus_one = BigInt::from(-1);

    let visit = |cols: &[usize], sign: i32, det: &mut SparsePolynomial| {
        let monomial = Monomial::from_pairs((0..n).map(|i| (m.var(i, cols[i]), 1)));
        det.add_term(monomial, if sign > 0 { &one } else { &minus_one });
    };

    visit(&cols, sign, &mut det);
    let mut counters = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                cols.swap(0, i);
            } else {
                cols.swap(counters[i], i);
            }
            sign = -sign;
            visit(&cols, sign, &mut det);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(det)
}

/// The lex-largest monomial of `p` with its coefficient.
pub fn initial_monomial(p: &SparsePolynomial) -> Result<(Monomial, BigInt)> {
    p.leading_term()
        .map(|(m, c)| (m.clone(), c.clone()))
        .ok_or(Error::ZeroPolynomial)
}

/// The anti-diagonal product of the Toeplitz minor on `(I, J)`: the
/// monomial `prod_a x_{I[a] - J[d-1-a]}`.
pub fn antidiagonal_monomial(i_set: &[i64], j_set: &[i64]) -> Result<Monomial> {
    if i_set.len() != j_set.len() {
        return Err(Error::IndexSetSize {
            left: i_set.len(),
            right: j_set.len(),
        });
    }
    validate_strictly_increasing(i_set)?;
    validate_strictly_increasing(j_set)?;
    let d = i_set.len();
    Ok(Monomial::from_pairs(
        (0..d).map(|a| (i_set[a] - j_set[d - 1 - a], 1)),
    ))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Certifies that the `d`-minors of the Toeplitz submatrix on rows `K` and
/// columns `J` are linearly independent: every subset's determinant must
/// have the anti-diagonal product as its initial monomial, and those
/// monomials must be pairwise distinct.
pub fn certify_minors_li(k_set: &[i64], j_set: &[i64]) -> Result<bool> {
    validate_strictly_increasing(k_set)?;
    validate_strictly_increasing(j_set)?;
    let d = j_set.len();
    assert!(
        d >= 1 && k_set.len() >= d,
        "need |K| >= |J| >= 1 (got {} and {d})",
        k_set.len()
    );

    let subsets = binomial(k_set.len() as u64, d as u64);
    let work = subsets.saturating_mul((1..=d as u64).product());
    if work > CERTIFY_WORK_LIMIT {
        return Err(Error::GuardExceeded {
            what: "minor certification Leibniz work",
            limit: CERTIFY_WORK_LIMIT as usize,
            got: work.min(usize::MAX as u64) as usize,
        });
    }

    let mut seen = std::collections::HashSet::new();
    for subset in k_set.iter().copied().combinations(d) {
        let det = leibniz_det(&symbolic_toeplitz(&subset, j_set)?)?;
        let (init, _) = initial_monomial(&det)?;
        if init != antidiagonal_monomial(&subset, j_set)? {
            return Ok(false);
        }
        if !seen.insert(init) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Determinant data for the square matrix `[U, PU]` at `n = 2d`.
#[derive(Clone, Debug)]
pub struct SymbolicVpv {
    pub det: SparsePolynomial,
    /// `None` exactly when the determinant is the zero polynomial.
    pub initial: Option<(Monomial, BigInt)>,
}

/// Builds `[U, PU]` with `U` the symbolic Toeplitz matrix on rows `1..=n`,
/// columns `1..=d`, and expands its determinant. Requires `n = 2d` (else
/// the concatenation is not square) and `n <= 10`.
pub fn symbolic_det_vpv(sigma: &Permutation, n: usize, d: usize) -> Result<SymbolicVpv> {
    if n != 2 * d {
        return Err(Error::NotSquareConcat { n, d });
    }
    assert_eq!(sigma.n(), n, "permutation size mismatch");
    let inverse = sigma.inverse();
    // (PU)[i][j] = U[sigma^{-1}(i)][j] = x_{sigma^{-1}(i) - j}.
    let matrix = SymbolicMatrix::from_fn(n, 2 * d, |i, j| {
        if j < d {
            i as i64 - j as i64
        } else {
            inverse.apply(i) as i64 - (j - d) as i64
        }
    });
    let det = leibniz_det(&matrix)?;
    let initial = det.leading_term().map(|(m, c)| (m.clone(), c.clone()));
    Ok(SymbolicVpv { det, initial })
}
