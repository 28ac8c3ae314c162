use serde::Serialize;

use super::{BoundError, TransformMatrix};
use crate::poly::{truncate_with_report, ExponentVector, PolyError, SparsePolynomial};

/// `f` on `K_g = {x : g_j(x) ≥ 0}` with an even degree bound `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemialgebraicProblem {
    pub f: SparsePolynomial,
    pub g: Vec<SparsePolynomial>,
    pub d: u32,
    /// Multiplier matrix supplied by the user, if any.
    pub a: Option<TransformMatrix>,
    /// Half-widths of a box containing `K_g`, when known from construction.
    pub sample_box: Option<Vec<f64>>,
}

/// Least even `d ≥ max{2, deg f, deg g_j}`.
pub fn default_degree(f: &SparsePolynomial, g: &[SparsePolynomial]) -> u32 {
    let top = g
        .iter()
        .map(|p| p.degree())
        .fold(f.degree().max(2), u32::max);
    top + top % 2
}

impl SemialgebraicProblem {
    pub fn new(
        f: SparsePolynomial,
        g: Vec<SparsePolynomial>,
        d: Option<u32>,
    ) -> Result<Self, BoundError> {
        let n = f.n();
        if let Some(j) = g.iter().position(|p| p.n() != n) {
            return Err(BoundError::VariableCount {
                generator: j + 1,
                expected: n,
                found: g[j].n(),
            });
        }
        let d = match d {
            Some(d) => {
                if d < 2 || d % 2 != 0 {
                    return Err(PolyError::OddDegree(d).into());
                }
                let degree = g.iter().map(|p| p.degree()).fold(f.degree(), u32::max);
                if degree > d {
                    return Err(PolyError::DegreeTooSmall { bound: d, degree }.into());
                }
                d
            }
            None => default_degree(&f, &g),
        };
        Ok(SemialgebraicProblem {
            f,
            g,
            d,
            a: None,
            sample_box: None,
        })
    }

    pub fn unconstrained(f: SparsePolynomial, d: Option<u32>) -> Result<Self, BoundError> {
        Self::new(f, Vec::new(), d)
    }

    pub fn with_matrix(mut self, a: TransformMatrix) -> Result<Self, BoundError> {
        if a.m() != self.m() {
            return Err(BoundError::MatrixSize {
                expected: self.m() + 1,
                found: a.m() + 1,
            });
        }
        self.a = Some(a);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn m(&self) -> usize {
        self.g.len()
    }

    /// `(g_0, g_1, …, g_m)` with `g_0 = −f`.
    pub fn generators_with_objective(&self) -> Vec<SparsePolynomial> {
        std::iter::once(-&self.f)
            .chain(self.g.iter().cloned())
            .collect()
    }

    /// `(g_{d,i})` for `g_0 = −f, g_1, …, g_m`, indexed `[j][i]`.
    pub fn top_table(&self) -> Vec<Vec<f64>> {
        self.generators_with_objective()
            .iter()
            .map(|p| p.top_coefficients(self.d))
            .collect()
    }

    /// Replaces each `g_j` by `g_j′`, reporting the dropped exponents per
    /// generator (1-based). `f` is left as is.
    pub fn normalized(&self) -> (Self, Vec<(usize, Vec<ExponentVector>)>) {
        let mut out = self.clone();
        let mut dropped = Vec::new();
        for (j, g) in self.g.iter().enumerate() {
            let (t, gone) =
                truncate_with_report(g, self.d).expect("degree checked at construction");
            if !gone.is_empty() {
                dropped.push((j + 1, gone));
            }
            out.g[j] = t;
        }
        (out, dropped)
    }

    /// The problem with generators restricted to `indices` (0-based into `g`).
    pub fn subproblem(&self, indices: &[usize]) -> Self {
        SemialgebraicProblem {
            f: self.f.clone(),
            g: indices.iter().map(|&j| self.g[j].clone()).collect(),
            d: self.d,
            a: None,
            sample_box: self.sample_box.clone(),
        }
    }

    /// `min_j g_j(x)`, or `+∞` when `m = 0`.
    pub fn min_generator(&self, x: &[f64]) -> f64 {
        self.g
            .iter()
            .map(|g| g.eval_unchecked(x))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_scales(values: &[f64]) -> Result<(), BoundError> {
    match values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(index) => Err(PolyError::NonPositiveScale {
            index,
            value: values[index],
        }
        .into()),
        None => Ok(()),
    }
}

fn corner_sum(
    n: usize,
    vars: &[usize],
    d: u32,
    weights: &[f64],
    constant: f64,
) -> SparsePolynomial {
    let terms = std::iter::once((ExponentVector::zeros(n), constant)).chain(
        vars.iter()
            .map(|&i| (ExponentVector::corner(n, i, d), -weights[i])),
    );
    SparsePolynomial::from_terms(n, terms).expect("well-formed terms")
}

/// `K_g = {x : x_1^d + ⋯ + x_n^d ≤ M}`.
pub fn hyperellipsoid_problem(
    f: &SparsePolynomial,
    big_m: f64,
    d: u32,
) -> Result<SemialgebraicProblem, BoundError> {
    check_scales(&[big_m])?;
    let n = f.n();
    let vars: Vec<usize> = (0..n).collect();
    let g = corner_sum(n, &vars, d, &vec![1.0; n], big_m);
    let mut p = SemialgebraicProblem::new(f.clone(), vec![g], Some(d))?;
    p.sample_box = Some(vec![big_m.powf(1.0 / d as f64); n]);
    Ok(p)
}

/// `K_g = ∏ [−N_i, N_i]` via `g_i = N_i^d − x_i^d`.
pub fn hypercube_problem(
    f: &SparsePolynomial,
    scale: &[f64],
    d: u32,
) -> Result<SemialgebraicProblem, BoundError> {
    let n = f.n();
    if scale.len() != n {
        return Err(PolyError::Dimension {
            expected: n,
            found: scale.len(),
        }
        .into());
    }
    check_scales(scale)?;
    let g = (0..n)
        .map(|i| corner_sum(n, &[i], d, &vec![1.0; n], scale[i].powi(d as i32)))
        .collect();
    let mut p = SemialgebraicProblem::new(f.clone(), g, Some(d))?;
    p.sample_box = Some(scale.to_vec());
    Ok(p)
}

/// `g_j = 1 − Σ_{i∈I_j} (x_i/N_i)^d` for a partition `I_1, …, I_m` of the
/// variables (0-based indices).
pub fn partition_problem(
    f: &SparsePolynomial,
    scale: &[f64],
    partition: &[Vec<usize>],
    d: u32,
) -> Result<SemialgebraicProblem, BoundError> {
    let n = f.n();
    if scale.len() != n {
        return Err(PolyError::Dimension {
            expected: n,
            found: scale.len(),
        }
        .into());
    }
    check_scales(scale)?;
    let mut seen = vec![false; n];
    for block in partition {
        if block.is_empty() {
            return Err(BoundError::Partition("empty block".into()));
        }
        for &i in block {
            if i >= n || seen[i] {
                return Err(BoundError::Partition(format!(
                    "index {} is out of range or repeated",
                    i + 1
                )));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(BoundError::Partition(format!(
            "variable x{} is not covered",
            i + 1
        )));
    }
    let weights: Vec<f64> = scale.iter().map(|s| s.powi(-(d as i32))).collect();
    let g = partition
        .iter()
        .map(|block| corner_sum(n, block, d, &weights, 1.0))
        .collect();
    let mut p = SemialgebraicProblem::new(f.clone(), g, Some(d))?;
    p.sample_box = Some(scale.to_vec());
    Ok(p)
}
