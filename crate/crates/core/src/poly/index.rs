use std::collections::BTreeSet;

use super::{ExponentVector, PolyError, SparsePolynomial};

/// The index sets of a polynomial relative to an even degree bound `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSets {
    /// Support of `f` without `0` and the corners `d·e_i`.
    pub omega: BTreeSet<ExponentVector>,
    /// Elements of `omega` whose term is not a square.
    pub delta: BTreeSet<ExponentVector>,
    pub delta_lt: BTreeSet<ExponentVector>,
    pub delta_eq: BTreeSet<ExponentVector>,
    /// `(f_{d,1}, …, f_{d,n})`.
    pub top: Vec<f64>,
}

/// `c·x^α` is a square in `ℝ[x]` iff `c > 0` and every `α_i` is even.
pub fn is_square_term(alpha: &ExponentVector, c: f64) -> bool {
    c > 0.0 && alpha.all_even()
}

fn check_degree(f: &SparsePolynomial, d: u32) -> Result<(), PolyError> {
    if d < 2 || d % 2 != 0 {
        return Err(PolyError::OddDegree(d));
    }
    let degree = f.degree();
    if degree > d {
        return Err(PolyError::DegreeTooSmall { bound: d, degree });
    }
    Ok(())
}

pub fn index_sets(f: &SparsePolynomial, d: u32) -> Result<IndexSets, PolyError> {
    check_degree(f, d)?;
    let mut sets = IndexSets {
        omega: BTreeSet::new(),
        delta: BTreeSet::new(),
        delta_lt: BTreeSet::new(),
        delta_eq: BTreeSet::new(),
        top: f.top_coefficients(d),
    };
    for (alpha, c) in f.terms() {
        if alpha.is_zero() || alpha.corner_index(d).is_some() {
            continue;
        }
        sets.omega.insert(alpha.clone());
        if is_square_term(alpha, c) {
            continue;
        }
        sets.delta.insert(alpha.clone());
        if alpha.order() < d {
            sets.delta_lt.insert(alpha.clone());
        } else {
            sets.delta_eq.insert(alpha.clone());
        }
    }
    Ok(sets)
}

/// `g′ = g(0) + Σ_{α∈Δ(-g)} g_α x^α + Σ_i g_{d,i} x_i^d`.
///
/// Removes the terms of `g` whose negation is a square, which gives
/// `-g′ ≤ -g` everywhere.
pub fn truncate_to_delta_form(g: &SparsePolynomial, d: u32) -> Result<SparsePolynomial, PolyError> {
    truncate_with_report(g, d).map(|(p, _)| p)
}

/// Like [`truncate_to_delta_form`], also returning the dropped exponents.
pub fn truncate_with_report(
    g: &SparsePolynomial,
    d: u32,
) -> Result<(SparsePolynomial, Vec<ExponentVector>), PolyError> {
    check_degree(g, d)?;
    let mut dropped = Vec::new();
    let kept = g.filter_terms(|alpha, c| {
        let structural = alpha.is_zero() || alpha.corner_index(d).is_some();
        // -g has coefficient -c on α.
        if structural || !is_square_term(alpha, -c) {
            true
        } else {
            dropped.push(alpha.clone());
            false
        }
    });
    Ok((kept, dropped))
}
