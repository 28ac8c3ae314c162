//! Sparse multivariate polynomials with real coefficients.
//!
//! A [`SparsePolynomial`] stores only its nonzero terms, keyed by a dense
//! [`ExponentVector`]. Besides evaluation and the small amount of arithmetic
//! the bound builders need, this module owns the index-set machinery: the
//! non-corner support `Ω(f)`, the non-square subset `Δ(f)` and its split by
//! total degree, and the truncation that puts a generator into the form
//! `g(0) + Σ_{α∈Δ(-g)} g_α x^α + Σ_i g_{d,i} x_i^d`.

mod index;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index::{
    index_sets, is_square_term, truncate_to_delta_form, truncate_with_report, IndexSets,
};
pub use text::parse_polynomial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("exponent vector has length {found}, expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("point has dimension {found}, polynomial has {expected} variables")]
    Dimension { expected: usize, found: usize },
    #[error("degree bound {0} must be even and at least 2")]
    OddDegree(u32),
    #[error("degree bound {bound} is below the polynomial degree {degree}")]
    DegreeTooSmall { bound: u32, degree: u32 },
    #[error("scale factor N_{index} = {value} must be positive")]
    NonPositiveScale { index: usize, value: f64 },
    #[error("coefficient {0} is not finite")]
    NonFinite(f64),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// A multi-index `α ∈ ℕⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(entries: Vec<u32>) -> Self {
        ExponentVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    /// `d·e_i`, the exponent of the corner monomial `x_i^d`.
    pub fn corner(n: usize, i: usize, d: u32) -> Self {
        let mut v = vec![0; n];
        v[i] = d;
        ExponentVector(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `|α|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn all_even(&self) -> bool {
        self.0.iter().all(|a| a % 2 == 0)
    }

    /// Returns `Some(i)` if this is `d·e_i` for the given `d`.
    pub fn corner_index(&self, d: u32) -> Option<usize> {
        let mut hit = None;
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if a != d || hit.is_some() {
                return None;
            }
            hit = Some(i);
        }
        hit
    }

    /// Indices `i` with `α_i > 0`.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, _)| i)
    }

    /// `x^α` with the convention `0⁰ = 1`.
    pub fn eval_monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        ExponentVector(v)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A polynomial in `n` variables stored as `α ↦ f_α` over its nonzero terms.
///
/// The zero polynomial has no terms and degree 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct SparsePolynomial {
    n: usize,
    terms: BTreeMap<ExponentVector, f64>,
}

impl SparsePolynomial {
    pub fn zero(n: usize) -> Self {
        SparsePolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(ExponentVector::zeros(n), c);
        p
    }

    /// Builds a polynomial from `(α, c)` pairs, summing repeated exponents and
    /// dropping zero coefficients.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (ExponentVector, f64)>,
    {
        let mut p = Self::zero(n);
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(PolyError::Arity {
                    expected: n,
                    found: alpha.len(),
                });
            }
            if !c.is_finite() {
                return Err(PolyError::NonFinite(c));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// `c·x^α` for an exponent given as a plain slice.
    pub fn monomial(alpha: &[u32], c: f64) -> Self {
        let n = alpha.len();
        let mut p = Self::zero(n);
        p.add_term(ExponentVector::new(alpha.to_vec()), c);
        p
    }

    fn add_term(&mut self, alpha: ExponentVector, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(alpha);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.order()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, f64)> + '_ {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coefficient(&self, alpha: &ExponentVector) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn coefficient_of(&self, alpha: &[u32]) -> f64 {
        self.coefficient(&ExponentVector::new(alpha.to_vec()))
    }

    /// `f(0)`.
    pub fn constant_term(&self) -> f64 {
        self.coefficient(&ExponentVector::zeros(self.n))
    }

    /// `f_{d,i}`, the coefficient of `x_i^d`.
    pub fn top_coefficient(&self, i: usize, d: u32) -> f64 {
        self.coefficient(&ExponentVector::corner(self.n, i, d))
    }

    /// `(f_{d,1}, …, f_{d,n})`.
    pub fn top_coefficients(&self, d: u32) -> Vec<f64> {
        (0..self.n).map(|i| self.top_coefficient(i, d)).collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.n {
            return Err(PolyError::Dimension {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, &c)| c * a.eval_monomial(x))
            .sum()
    }

    /// `f̃(y) = f(N_1 y_1, …, N_n y_n)`.
    pub fn rescale(&self, scale: &[f64]) -> Result<Self, PolyError> {
        if scale.len() != self.n {
            return Err(PolyError::Dimension {
                expected: self.n,
                found: scale.len(),
            });
        }
        if let Some((index, &value)) = scale
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > 0.0 && v.is_finite()))
        {
            return Err(PolyError::NonPositiveScale { index, value });
        }
        let mut out = Self::zero(self.n);
        for (a, &c) in &self.terms {
            out.add_term(a.clone(), c * a.eval_monomial(scale));
        }
        Ok(out)
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (a, &c) in &self.terms {
            out.add_term(a.clone(), k * c);
        }
        out
    }

    /// `self + k·other`. Panics if the variable counts differ.
    pub fn add_scaled(&self, other: &Self, k: f64) -> Self {
        assert_eq!(self.n, other.n, "variable count mismatch");
        let mut out = self.clone();
        for (a, &c) in &other.terms {
            out.add_term(a.clone(), k * c);
        }
        out
    }

    /// Keeps only the terms for which `keep` returns true.
    pub fn filter_terms<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&ExponentVector, f64) -> bool,
    {
        SparsePolynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(a, &c)| keep(a, c))
                .map(|(a, &c)| (a.clone(), c))
                .collect(),
        }
    }

    /// Same terms, embedded in `m ≥ n` variables.
    pub fn with_variable_count(&self, m: usize) -> Self {
        assert!(m >= self.n);
        SparsePolynomial {
            n: m,
            terms: self
                .terms
                .iter()
                .map(|(a, &c)| {
                    let mut v = a.0.clone();
                    v.resize(m, 0);
                    (ExponentVector(v), c)
                })
                .collect(),
        }
    }
}

impl Neg for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        self.scale(-1.0)
    }
}

impl Neg for SparsePolynomial {
    type Output = SparsePolynomial;
    fn neg(self) -> SparsePolynomial {
        self.scale(-1.0)
    }
}

impl Add for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn add(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        self.add_scaled(rhs, 1.0)
    }
}

impl Sub for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn sub(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        self.add_scaled(rhs, -1.0)
    }
}

impl Mul<f64> for &SparsePolynomial {
    type Output = SparsePolynomial;
    fn mul(self, k: f64) -> SparsePolynomial {
        self.scale(k)
    }
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    c: f64,
}

impl TryFrom<PolyJson> for SparsePolynomial {
    type Error = PolyError;
    fn try_from(p: PolyJson) -> Result<Self, PolyError> {
        SparsePolynomial::from_terms(
            p.n,
            p.terms
                .into_iter()
                .map(|t| (ExponentVector::new(t.alpha), t.c)),
        )
    }
}

impl From<SparsePolynomial> for PolyJson {
    fn from(p: SparsePolynomial) -> Self {
        PolyJson {
            n: p.n,
            terms: p
                .terms
                .into_iter()
                .map(|(a, c)| TermJson { alpha: a.0, c })
                .collect(),
        }
    }
}
