//! The trivial bound on a box and its comparison with the GP bound.
//!
//! On `∏[−N_i, N_i]` every non-square term satisfies
//! `f_α x^α ≥ −|f_α| N^α`, so `f_tr,N = f(0) − Σ_{α∈Δ′(f)} |f_α| N^α` is a
//! lower bound. The GP bound on the same box is never worse, and the two
//! agree when every `f_{d,i} ≤ 0`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::bounds::{
    hypercube_problem, lower_bound_with, BoundError, BoundOptions, BoundStatus, PathChoice,
};
use crate::gp::{GeometricProgram, MonomialFunction, Posynomial};
use crate::poly::{is_square_term, ExponentVector, PolyError, SparsePolynomial};

/// Slack allowed in `gp ≥ f_tr`.
pub const DOMINANCE_TOL: f64 = 1e-6;
/// Relative slack allowed in `gp = f_tr` when every `f_{d,i} ≤ 0`.
pub const EQUALITY_RTOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermContribution {
    pub alpha: ExponentVector,
    /// `|f_α|·N^α`.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrivialBoundReport {
    pub f_tr: f64,
    pub delta_prime: BTreeSet<ExponentVector>,
    pub per_term: Vec<TermContribution>,
}

/// Exponents `α ≠ 0` whose term `f_α x^α` is not a square. Unlike `Δ(f)`
/// this keeps negative corner terms and has no degree cap.
pub fn delta_prime(f: &SparsePolynomial) -> BTreeSet<ExponentVector> {
    f.terms()
        .filter(|(a, c)| !a.is_zero() && !is_square_term(a, *c))
        .map(|(a, _)| a.clone())
        .collect()
}

fn check_box(f: &SparsePolynomial, scale: &[f64]) -> Result<(), BoundError> {
    if scale.len() != f.n() {
        return Err(PolyError::Dimension {
            expected: f.n(),
            found: scale.len(),
        }
        .into());
    }
    if let Some(index) = scale.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(PolyError::NonPositiveScale {
            index,
            value: scale[index],
        }
        .into());
    }
    Ok(())
}

pub fn trivial_bound(
    f: &SparsePolynomial,
    scale: &[f64],
) -> Result<TrivialBoundReport, BoundError> {
    check_box(f, scale)?;
    let delta_prime = delta_prime(f);
    let per_term: Vec<TermContribution> = delta_prime
        .iter()
        .map(|a| TermContribution {
            alpha: a.clone(),
            contribution: f.coefficient(a).abs() * a.eval_monomial(scale),
        })
        .collect();
    let f_tr = f.constant_term() - per_term.iter().map(|t| t.contribution).sum::<f64>();
    Ok(TrivialBoundReport {
        f_tr,
        delta_prime,
        per_term,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypercubeComparison {
    pub f_tr: f64,
    /// GP bound on the box; `None` if the relaxation produced no value.
    pub gp_bound: Option<f64>,
    pub gp_status: BoundStatus,
    /// `gp_bound − f_tr`.
    pub gap: Option<f64>,
    /// Every `f_{d,i} ≤ 0`, so the two bounds should coincide.
    pub equality_expected: bool,
    /// `gp_bound ≥ f_tr − DOMINANCE_TOL`.
    pub dominance_holds: bool,
    /// Checked only when `equality_expected`.
    pub equality_holds: Option<bool>,
}

/// Computes `f_tr,N` and the canonical-path GP bound on `∏[−N_i, N_i]`.
pub fn compare_with_gp(
    f: &SparsePolynomial,
    scale: &[f64],
    d: u32,
) -> Result<HypercubeComparison, BoundError> {
    let tr = trivial_bound(f, scale)?;
    let problem = hypercube_problem(f, scale, d)?;
    // The solver's gap is relative to the program's objective, which is at
    // most the sup of |f| on the box; keep the absolute error well inside
    // DOMINANCE_TOL.
    let size: f64 = f
        .terms()
        .map(|(a, c)| (c * a.eval_monomial(scale)).abs())
        .sum();
    let opts = BoundOptions {
        path: PathChoice::Canonical,
        tol: (0.1 * DOMINANCE_TOL / (1.0 + size)).clamp(1e-13, 1e-8),
        ..BoundOptions::default()
    };
    let r = lower_bound_with(&problem, None, &opts)?;
    let gp_bound = match r.status {
        BoundStatus::Bound => r.value,
        _ => None,
    };
    let equality_expected = f.top_coefficients(d).iter().all(|&c| c <= 0.0);
    let gap = gp_bound.map(|g| g - tr.f_tr);
    Ok(HypercubeComparison {
        f_tr: tr.f_tr,
        gp_bound,
        gp_status: r.status,
        gap,
        equality_expected,
        dominance_holds: gap.is_some_and(|g| g >= -DOMINANCE_TOL),
        equality_holds: equality_expected
            .then(|| gap.is_some_and(|g| g.abs() <= EQUALITY_RTOL * (1.0 + tr.f_tr.abs()))),
    })
}

/// The single-term program whose optimum is `|f_α|`:
/// for `|α| < d`, minimize `Σ z_i + (d−|α|)[(|f_α|/d)^d Π (α_i/z_i)^{α_i}]^{1/(d−|α|)}`;
/// for `|α| = d`, minimize `Σ z_i` s.t. `(|f_α|/d)^d Π (α_i/z_i)^{α_i} ≤ 1`.
/// Requires every `α_i > 0` and `0 < |α| ≤ d`.
pub fn lemma_program(alpha: &[u32], f_alpha: f64, d: u32) -> GeometricProgram {
    let n = alpha.len();
    let order: u32 = alpha.iter().sum();
    assert!(alpha.iter().all(|&a| a > 0) && order <= d && f_alpha != 0.0);
    let df = d as f64;
    let base = df * (f_alpha.abs() / df).ln()
        + alpha
            .iter()
            .map(|&a| a as f64 * (a as f64).ln())
            .sum::<f64>();
    let mut gp = GeometricProgram::new(n);
    let mut terms: Vec<MonomialFunction> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            MonomialFunction::from_log(0.0, e)
        })
        .collect();
    if order < d {
        let e = (d - order) as f64;
        terms.push(MonomialFunction::from_log(
            e.ln() + base / e,
            alpha.iter().map(|&a| -(a as f64) / e).collect(),
        ));
    } else {
        gp.ineq
            .push(Posynomial::new(vec![MonomialFunction::from_log(
                base,
                alpha.iter().map(|&a| -(a as f64)).collect(),
            )]));
    }
    gp.objective = Posynomial::new(terms);
    gp
}

/// The minimizer `z_i = α_i |f_α| / d` of [`lemma_program`].
pub fn lemma_minimizer(alpha: &[u32], f_alpha: f64, d: u32) -> Vec<f64> {
    alpha
        .iter()
        .map(|&a| a as f64 * f_alpha.abs() / d as f64)
        .collect()
}
