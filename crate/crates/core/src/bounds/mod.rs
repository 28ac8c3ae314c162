//! Lower bounds for `f` on `K_g` from geometric programs.
//!
//! The unconstrained bound `f_gp = f(0) − ρ(f)` certifies that `f − f_gp` is
//! a sum of binomial squares. On `K_g` the multipliers `λ` of the Lagrangian
//! `G(λ) = f − Σ λ_j g_j` are reparametrized as `λ = Aμ`; when `A` has the
//! right sign pattern the resulting relaxation is again a geometric program
//! whose optimum gives `f_gp,g = −h_0(0) − ρ`. [`lower_bound_constrained`]
//! picks `A` automatically unless one is supplied.

mod matrix;
mod problem;
mod relax;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::poly::{index_sets, ExponentVector, PolyError};

pub use matrix::{
    canonical_matrix, check_gp_hypothesis, condition_dagger, condition_star, matrix_for_m1,
    matrix_for_m2, select_generator_subset, transformed_generators, GeneratorSubset, Hypothesis,
    HypothesisViolation, SubsetCondition, TransformMatrix, STRICT_MARGIN,
};
pub use problem::{
    default_degree, hypercube_problem, hyperellipsoid_problem, partition_problem,
    SemialgebraicProblem,
};
pub use relax::{
    build_relaxation, build_unconstrained, lower_bound_constrained, lower_bound_unconstrained,
    lower_bound_with, solve_relaxation, BoundOptions, BoundResult, BoundStatus, PathChoice,
    RelaxationProgram, TheoremPath, Unconstrained, WSource, Witness,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("generator {generator} has {found} variables, f has {expected}")]
    VariableCount {
        generator: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix is {found}x{found}, problem needs {expected}x{expected}")]
    MatrixSize { expected: usize, found: usize },
    #[error("invalid matrix: {0}")]
    Matrix(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("tolerance must lie in (0, 1e-2], got {0}")]
    Tolerance(f64),
}

/// `Δ = Δ(f) ∪ Δ(−g_1) ∪ ⋯ ∪ Δ(−g_m)`.
pub fn delta_union(problem: &SemialgebraicProblem) -> BTreeSet<ExponentVector> {
    let d = problem.d;
    let mut out = index_sets(&problem.f, d).expect("degree checked").delta;
    for g in &problem.g {
        out.extend(index_sets(&-g, d).expect("degree checked").delta);
    }
    out
}
