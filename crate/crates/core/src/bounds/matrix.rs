use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{delta_union, BoundError, SemialgebraicProblem};
use crate::poly::{ExponentVector, SparsePolynomial};

/// Margin added to strict thresholds `c > t`.
pub const STRICT_MARGIN: f64 = 1e-6;

/// Relative size below which a combined coefficient counts as cancelled.
const CANCEL_TOL: f64 = 1e-12;

/// The `(m+1)×(m+1)` matrix of `λ_j = Σ_k a_jk μ_k`, with row 0 = `e_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransformMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransformMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, BoundError> {
        let size = rows.len();
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(BoundError::Matrix(
                "matrix must be square and nonempty".into(),
            ));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(BoundError::Matrix("entries must be finite".into()));
        }
        if rows[0][0] != 1.0 || rows[0][1..].iter().any(|&v| v != 0.0) {
            return Err(BoundError::Matrix("row 0 must be (1, 0, …, 0)".into()));
        }
        Ok(TransformMatrix { rows })
    }

    pub fn identity(m: usize) -> Self {
        let rows = (0..=m)
            .map(|j| (0..=m).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        TransformMatrix { rows }
    }

    /// Number of generators; the matrix is `(m+1)×(m+1)`.
    pub fn m(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.rows[j][k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `λ_j = Σ_k a_jk μ_k` for `j = 1..m`, given `μ_1..μ_m` (`μ_0 = 1`).
    pub fn multipliers(&self, mu: &[f64]) -> Vec<f64> {
        (1..=self.m())
            .map(|j| {
                self.rows[j][0]
                    + (1..=self.m())
                        .map(|k| self.rows[j][k] * mu[k - 1])
                        .sum::<f64>()
            })
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for TransformMatrix {
    type Error = BoundError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, BoundError> {
        TransformMatrix::new(rows)
    }
}

impl From<TransformMatrix> for Vec<Vec<f64>> {
    fn from(a: TransformMatrix) -> Self {
        a.rows
    }
}

/// Why a sign condition fails. Columns and generators are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisViolation {
    /// Column `i` does not have exactly one negative top coefficient.
    Column {
        column: usize,
        negatives: usize,
    },
    /// Row `j` of `A` has several positive entries and a negative one.
    Row {
        row: usize,
        positives: usize,
    },
    Precondition {
        column: usize,
        reason: String,
    },
    GeneratorCount {
        required: String,
        found: usize,
    },
}

impl fmt::Display for HypothesisViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypothesisViolation::Column { column, negatives } => write!(
                f,
                "column {column}: {negatives} strictly negative top coefficients, need exactly one"
            ),
            HypothesisViolation::Row { row, positives } => write!(
                f,
                "row {row} of A: {positives} positive entries alongside a negative one"
            ),
            HypothesisViolation::Precondition { column, reason } => {
                write!(f, "column {column}: {reason}")
            }
            HypothesisViolation::GeneratorCount { required, found } => {
                write!(f, "needs {required} generators, problem has {found}")
            }
        }
    }
}

/// Which columns and rows produce constraints in the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// For each column `i`, the unique `k` with `(h_k)_{d,i} < 0`, or `None`
    /// when the column is all zero and no `α ∈ Δ` involves `x_i`.
    pub column_owner: Vec<Option<usize>>,
    /// For each row `j = 1..m`, the unique `k` with `a_jk > 0` when the row
    /// also has a negative entry; `None` when the row constraint is empty.
    pub row_pivot: Vec<Option<usize>>,
}

/// Columns `i` such that some `α ∈ Δ` has `α_i > 0`.
fn touched_columns(problem: &SemialgebraicProblem) -> Vec<bool> {
    let delta = delta_union(problem);
    touched_by(&delta, problem.n())
}

fn touched_by(delta: &BTreeSet<ExponentVector>, n: usize) -> Vec<bool> {
    let mut out = vec![false; n];
    for a in delta {
        for i in a.support() {
            out[i] = true;
        }
    }
    out
}

/// Condition (*): for each column the last nonzero top coefficient among
/// `g_0 = −f, g_1, …, g_m` is negative. Returns that index per column.
///
/// A column in which every top coefficient vanishes is accepted (owner
/// `None`) when no term of `Δ` involves the variable, since its constraint
/// is then `0 ≤ 0`.
pub fn condition_star(
    problem: &SemialgebraicProblem,
) -> Result<Vec<Option<usize>>, HypothesisViolation> {
    let tops = problem.top_table();
    let touched = touched_columns(problem);
    (0..problem.n())
        .map(
            |i| match (0..tops.len()).rev().find(|&j| tops[j][i] != 0.0) {
                Some(j) if tops[j][i] < 0.0 => Ok(Some(j)),
                Some(j) => Err(HypothesisViolation::Precondition {
                    column: i + 1,
                    reason: format!("last nonzero top coefficient (generator {j}) is positive"),
                }),
                None if !touched[i] => Ok(None),
                None => Err(HypothesisViolation::Precondition {
                    column: i + 1,
                    reason: "all top coefficients vanish".into(),
                }),
            },
        )
        .collect()
}

/// Condition (†): each column has exactly one strictly negative top
/// coefficient among `g_0 = −f, g_1, …, g_m` (all-zero columns not touched
/// by `Δ` are accepted).
pub fn condition_dagger(problem: &SemialgebraicProblem) -> bool {
    let tops = problem.top_table();
    let touched = touched_columns(problem);
    (0..problem.n()).all(|i| {
        let neg = tops.iter().filter(|t| t[i] < 0.0).count();
        neg == 1 || (neg == 0 && !touched[i] && tops.iter().all(|t| t[i] == 0.0))
    })
}

/// The lower triangular matrix built column by column from condition (*):
/// `a_jk = min(0, min_{i: j_i = j} −[(g_k)_{d,i} + Σ_{j>j'>k} a_{j'k}(g_{j'})_{d,i}] / (g_j)_{d,i})`.
pub fn canonical_matrix(
    problem: &SemialgebraicProblem,
) -> Result<TransformMatrix, HypothesisViolation> {
    let owner = condition_star(problem)?;
    let tops = problem.top_table();
    let m = problem.m();
    let mut a = TransformMatrix::identity(m);
    for j in 1..=m {
        let cols: Vec<usize> = (0..problem.n()).filter(|&i| owner[i] == Some(j)).collect();
        for k in 0..j {
            let mut v = 0.0f64;
            for &i in &cols {
                let s = tops[k][i]
                    + (k + 1..j)
                        .map(|jp| a.rows[jp][k] * tops[jp][i])
                        .sum::<f64>();
                v = v.min(-s / tops[j][i]);
            }
            a.rows[j][k] = v;
        }
    }
    debug_assert!(canonical_postconditions(problem, &a, &owner));
    Ok(a)
}

fn canonical_postconditions(
    problem: &SemialgebraicProblem,
    a: &TransformMatrix,
    owner: &[Option<usize>],
) -> bool {
    let h = transformed_generators(problem, a);
    let d = problem.d;
    owner.iter().enumerate().all(|(i, o)| match o {
        None => true,
        Some(ji) => h.iter().enumerate().all(|(k, hk)| {
            let v = hk.top_coefficient(i, d);
            match k.cmp(ji) {
                std::cmp::Ordering::Greater => v == 0.0,
                std::cmp::Ordering::Equal => v < 0.0,
                std::cmp::Ordering::Less => v >= 0.0,
            }
        }),
    })
}

/// `A = [[1, 0], [−c, 1]]` with `c ≥ −f_{d,i}/(g_1)_{d,i}` where
/// `(g_1)_{d,i} < 0`, `c > −f_{d,i}/(g_1)_{d,i}` where `(g_1)_{d,i} > 0`,
/// and `c ≥ 0`.
pub fn matrix_for_m1(
    problem: &SemialgebraicProblem,
) -> Result<TransformMatrix, HypothesisViolation> {
    if problem.m() != 1 {
        return Err(HypothesisViolation::GeneratorCount {
            required: "exactly 1".into(),
            found: problem.m(),
        });
    }
    let d = problem.d;
    let touched = touched_columns(problem);
    let mut c = 0.0f64;
    for i in 0..problem.n() {
        let fi = problem.f.top_coefficient(i, d);
        let gi = problem.g[0].top_coefficient(i, d);
        if gi < 0.0 {
            c = c.max(-fi / gi);
        } else if gi > 0.0 {
            c = c.max(-fi / gi + STRICT_MARGIN);
        } else if !(fi > 0.0 || (fi == 0.0 && !touched[i])) {
            return Err(HypothesisViolation::Precondition {
                column: i + 1,
                reason: "(g_1)_{d,i} = 0 requires f_{d,i} > 0".into(),
            });
        }
    }
    Ok(TransformMatrix {
        rows: vec![vec![1.0, 0.0], vec![-c, 1.0]],
    })
}

/// `A = [[1,0,0],[0,1,0],[0,−c,1]]` for two generators and `f_{d,i} = 0`,
/// with `c ≥ (g_1)_{d,i}/(g_2)_{d,i}` where `(g_2)_{d,i} < 0`, strict where
/// `(g_2)_{d,i} > 0`, and `c ≥ 0`.
pub fn matrix_for_m2(
    problem: &SemialgebraicProblem,
) -> Result<TransformMatrix, HypothesisViolation> {
    if problem.m() != 2 {
        return Err(HypothesisViolation::GeneratorCount {
            required: "exactly 2".into(),
            found: problem.m(),
        });
    }
    let d = problem.d;
    let touched = touched_columns(problem);
    let mut c = 0.0f64;
    for i in 0..problem.n() {
        if problem.f.top_coefficient(i, d) != 0.0 {
            return Err(HypothesisViolation::Precondition {
                column: i + 1,
                reason: "requires f_{d,i} = 0".into(),
            });
        }
        let g1 = problem.g[0].top_coefficient(i, d);
        let g2 = problem.g[1].top_coefficient(i, d);
        if g2 < 0.0 {
            c = c.max(g1 / g2);
        } else if g2 > 0.0 {
            c = c.max(g1 / g2 + STRICT_MARGIN);
        } else if !(g1 < 0.0 || (g1 == 0.0 && !touched[i])) {
            return Err(HypothesisViolation::Precondition {
                column: i + 1,
                reason: "(g_2)_{d,i} = 0 requires (g_1)_{d,i} < 0".into(),
            });
        }
    }
    Ok(TransformMatrix {
        rows: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, -c, 1.0]],
    })
}

/// `h_k = Σ_j a_jk g_j` with `g_0 = −f`. Coefficients that cancel to within
/// rounding of the summands are set to zero.
pub fn transformed_generators(
    problem: &SemialgebraicProblem,
    a: &TransformMatrix,
) -> Vec<SparsePolynomial> {
    let gs = problem.generators_with_objective();
    let n = problem.n();
    let support: BTreeSet<&ExponentVector> =
        gs.iter().flat_map(|g| g.terms().map(|(a, _)| a)).collect();
    (0..=problem.m())
        .map(|k| {
            let terms = support.iter().filter_map(|alpha| {
                let mut sum = 0.0;
                let mut mag = 0.0;
                for (j, g) in gs.iter().enumerate() {
                    let t = a.rows[j][k] * g.coefficient(alpha);
                    sum += t;
                    mag += t.abs();
                }
                (sum.abs() > CANCEL_TOL * mag).then(|| ((*alpha).clone(), sum))
            });
            SparsePolynomial::from_terms(n, terms).expect("finite coefficients")
        })
        .collect()
}

/// Checks the sign hypotheses under which the relaxation is a geometric
/// program: each row of `A` has exactly one positive entry or none
/// negative, and each column has exactly one negative `(h_k)_{d,i}`.
pub fn check_gp_hypothesis(
    problem: &SemialgebraicProblem,
    a: &TransformMatrix,
) -> Result<Hypothesis, HypothesisViolation> {
    if a.m() != problem.m() {
        return Err(HypothesisViolation::GeneratorCount {
            required: format!("{} (matrix size)", a.m()),
            found: problem.m(),
        });
    }
    let mut row_pivot = Vec::with_capacity(problem.m());
    for j in 1..=problem.m() {
        let row = &a.rows[j];
        let positives = row.iter().filter(|&&v| v > 0.0).count();
        let has_negative = row.iter().any(|&v| v < 0.0);
        if !has_negative {
            row_pivot.push(None);
        } else if positives == 1 {
            row_pivot.push(row.iter().position(|&v| v > 0.0));
        } else {
            return Err(HypothesisViolation::Row { row: j, positives });
        }
    }
    let h = transformed_generators(problem, a);
    let touched = touched_columns(problem);
    let d = problem.d;
    let mut column_owner = Vec::with_capacity(problem.n());
    for i in 0..problem.n() {
        let negs: Vec<usize> = (0..h.len())
            .filter(|&k| h[k].top_coefficient(i, d) < 0.0)
            .collect();
        match negs.len() {
            1 => column_owner.push(Some(negs[0])),
            0 if !touched[i] && h.iter().all(|hk| hk.top_coefficient(i, d) == 0.0) => {
                column_owner.push(None)
            }
            count => {
                return Err(HypothesisViolation::Column {
                    column: i + 1,
                    negatives: count,
                })
            }
        }
    }
    Ok(Hypothesis {
        column_owner,
        row_pivot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetCondition {
    Star,
    Dagger,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSubset {
    /// 0-based indices into `g`, increasing.
    pub indices: Vec<usize>,
    pub condition: SubsetCondition,
}

/// Largest subset of at most 8 generators satisfying (*) or (†); ties
/// broken by lexicographic order of the indices.
pub fn select_generator_subset(problem: &SemialgebraicProblem) -> Option<GeneratorSubset> {
    let m = problem.m();
    for size in (1..=m.min(8)).rev() {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let sub = problem.subproblem(&idx);
            if condition_star(&sub).is_ok() {
                return Some(GeneratorSubset {
                    indices: idx,
                    condition: SubsetCondition::Star,
                });
            }
            if condition_dagger(&sub) {
                return Some(GeneratorSubset {
                    indices: idx,
                    condition: SubsetCondition::Dagger,
                });
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
    }
    None
}

fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut p = k;
    while p > 0 {
        p -= 1;
        if idx[p] < m - k + p {
            idx[p] += 1;
            for q in p + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}
