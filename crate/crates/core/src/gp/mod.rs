//! Geometric programs and a log-barrier solver for them.
//!
//! A geometric program minimizes a posynomial subject to posynomial `≤ 1`
//! and monomial `= 1` constraints over strictly positive variables. After
//! the substitution `x = exp(u)` every posynomial becomes a log-sum-exp of
//! affine functions, which is convex; see [`log_transform`].

mod solver;
mod transform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use solver::{solve, solve_with, GpResult, GpStatus, SolverOptions};
pub use transform::{log_transform, AffineEquality, ConvexProgram, ExpAffine, LogSumExp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("monomial has {found} exponents, program has {expected} variables")]
    Arity { expected: usize, found: usize },
    #[error("monomial coefficient must be positive and finite, got {0}")]
    Coefficient(f64),
    #[error("point must be strictly positive with {expected} entries")]
    Point { expected: usize },
    #[error("tolerance {0} outside (0, 1e-2]")]
    Tolerance(f64),
}

/// `c · x_1^{a_1} ⋯ x_k^{a_k}` with `c > 0` and real exponents.
///
/// The coefficient is held as its logarithm so builders can form
/// coefficients such as `(|f_α|/d)^d` without overflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialFunction {
    pub log_coefficient: f64,
    pub exponents: Vec<f64>,
}

impl MonomialFunction {
    pub fn new(coefficient: f64, exponents: Vec<f64>) -> Result<Self, GpError> {
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return Err(GpError::Coefficient(coefficient));
        }
        Ok(MonomialFunction {
            log_coefficient: coefficient.ln(),
            exponents,
        })
    }

    pub fn from_log(log_coefficient: f64, exponents: Vec<f64>) -> Self {
        MonomialFunction {
            log_coefficient,
            exponents,
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.log_coefficient.exp()
    }

    pub fn log_eval(&self, x: &[f64]) -> f64 {
        self.log_coefficient
            + self
                .exponents
                .iter()
                .zip(x)
                .filter(|(a, _)| **a != 0.0)
                .map(|(a, xi)| a * xi.ln())
                .sum::<f64>()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.log_eval(x).exp()
    }
}

/// A sum of monomial functions over a shared variable space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Posynomial {
    pub terms: Vec<MonomialFunction>,
}

impl Posynomial {
    pub fn new(terms: Vec<MonomialFunction>) -> Self {
        Posynomial { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Multiplies every coefficient by `k > 0`.
    pub fn scaled(&self, k: f64) -> Self {
        let lk = k.ln();
        Posynomial {
            terms: self
                .terms
                .iter()
                .map(|t| MonomialFunction::from_log(t.log_coefficient + lk, t.exponents.clone()))
                .collect(),
        }
    }
}

/// Minimize `objective` s.t. `ineq[j] ≤ 1`, `eq[k] = 1`, `x > 0`.
///
/// An empty objective is the zero function; the program is then a
/// feasibility problem with optimal value 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricProgram {
    pub var_count: usize,
    pub objective: Posynomial,
    pub ineq: Vec<Posynomial>,
    pub eq: Vec<MonomialFunction>,
    pub var_names: Vec<String>,
}

impl GeometricProgram {
    pub fn new(var_count: usize) -> Self {
        GeometricProgram {
            var_count,
            objective: Posynomial::default(),
            ineq: Vec::new(),
            eq: Vec::new(),
            var_names: (0..var_count).map(|i| format!("x{}", i + 1)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let check = |m: &MonomialFunction| {
            if m.exponents.len() != self.var_count {
                return Err(GpError::Arity {
                    expected: self.var_count,
                    found: m.exponents.len(),
                });
            }
            if !m.log_coefficient.is_finite() || m.exponents.iter().any(|a| !a.is_finite()) {
                return Err(GpError::Coefficient(m.coefficient()));
            }
            Ok(())
        };
        self.objective.terms.iter().try_for_each(check)?;
        self.ineq
            .iter()
            .flat_map(|p| &p.terms)
            .try_for_each(check)?;
        self.eq.iter().try_for_each(check)
    }

    /// JSON listing of all terms, for reproducing solver reports.
    pub fn debug_dump(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn check_feasible(&self, point: &[f64]) -> Result<FeasibilityReport, GpError> {
        if point.len() != self.var_count || point.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(GpError::Point {
                expected: self.var_count,
            });
        }
        let max_ineq_violation = self
            .ineq
            .iter()
            .map(|p| (p.eval(point) - 1.0).max(0.0))
            .fold(0.0, f64::max);
        let max_eq_log_residual = self
            .eq
            .iter()
            .map(|m| m.log_eval(point).abs())
            .fold(0.0, f64::max);
        Ok(FeasibilityReport {
            max_ineq_violation,
            max_eq_log_residual,
            objective: self.objective.eval(point),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `max_j max(P_j(x) - 1, 0)`.
    pub max_ineq_violation: f64,
    /// `max_k |log ψ_k(x)|`.
    pub max_eq_log_residual: f64,
    pub objective: f64,
}
