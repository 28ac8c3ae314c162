use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    canonical_matrix, check_gp_hypothesis, delta_union, matrix_for_m1, matrix_for_m2,
    select_generator_subset, transformed_generators, BoundError, HypothesisViolation,
    SemialgebraicProblem, SubsetCondition, TransformMatrix,
};
use crate::gp::{self, GeometricProgram, GpStatus, MonomialFunction, Posynomial};
use crate::poly::{index_sets, ExponentVector, SparsePolynomial};

/// How the multiplier matrix is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    /// User matrix if given, else canonical, m1, m2, identity in that order.
    #[default]
    Auto,
    Canonical,
    M1,
    M2,
    Identity,
    /// Canonical or identity matrix on the largest admissible subset of `g`.
    Subset,
}

impl FromStr for PathChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(PathChoice::Auto),
            "canonical" => Ok(PathChoice::Canonical),
            "m1" => Ok(PathChoice::M1),
            "m2" => Ok(PathChoice::M2),
            "identity" => Ok(PathChoice::Identity),
            "subset" => Ok(PathChoice::Subset),
            other => Err(format!("unknown path '{other}'")),
        }
    }
}

/// Which construction produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremPath {
    Unconstrained,
    Canonical,
    M1,
    M2,
    Identity,
    UserMatrix,
    Subset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Bound,
    NegInfinity,
    NotAGeometricProgram,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZEntry {
    pub alpha: ExponentVector,
    /// 1-based variable index.
    pub i: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WEntry {
    pub alpha: ExponentVector,
    pub value: f64,
}

/// Solver point of the relaxation, with the recovered multipliers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    pub z: Vec<ZEntry>,
    pub w: Vec<WEntry>,
    /// `μ_1, …, μ_m`.
    pub mu: Vec<f64>,
    /// `λ_j = Σ_k a_jk μ_k`, `j = 1..m`.
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub status: BoundStatus,
    pub value: Option<f64>,
    pub theorem_path: Option<TheoremPath>,
    pub matrix: Option<TransformMatrix>,
    /// 1-based generator indices when a subset was used.
    pub generator_subset: Option<Vec<usize>>,
    pub witness: Option<Witness>,
    pub gp_status: Option<GpStatus>,
    pub diagnostics: Vec<String>,
}

impl BoundResult {
    fn bare(status: BoundStatus, value: Option<f64>) -> Self {
        BoundResult {
            status,
            value,
            theorem_path: None,
            matrix: None,
            generator_subset: None,
            witness: None,
            gp_status: None,
            diagnostics: Vec::new(),
        }
    }

    fn not_a_gp(diagnostics: Vec<String>) -> Self {
        BoundResult {
            diagnostics,
            ..Self::bare(BoundStatus::NotAGeometricProgram, None)
        }
    }

    /// The bound, or `−∞` for `NegInfinity`; `None` otherwise.
    pub fn as_f64(&self) -> Option<f64> {
        match self.status {
            BoundStatus::Bound => self.value,
            BoundStatus::NegInfinity => Some(f64::NEG_INFINITY),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundOptions {
    pub tol: f64,
    pub path: PathChoice,
    /// Replace each `g_j` by its truncation `g_j′` first.
    pub normalize: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            tol: 1e-8,
            path: PathChoice::Auto,
            normalize: true,
        }
    }
}

/// Where the value of `w_α` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum WSource {
    /// A program variable bounded below by `H(μ)_α^±`.
    Variable(usize),
    /// `w_α = coefficient · μ_k` (or the constant when `mu` is `None`),
    /// substituted because only one `h_k` contributes to `α`.
    Fixed { coefficient: f64, mu: Option<usize> },
}

/// A relaxation ready for the solver. The bound is `offset − ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationProgram {
    pub gp: GeometricProgram,
    /// `−h_0(0)`.
    pub offset: f64,
    pub matrix: TransformMatrix,
    /// `(α, i, variable)` for each `z_{α,i}`, `i` 0-based.
    pub z_vars: Vec<(ExponentVector, usize, usize)>,
    pub w_vars: Vec<(ExponentVector, WSource)>,
    /// Variable of `μ_k`, `k = 1..m`; `None` if `μ_k` appears nowhere.
    pub mu_vars: Vec<Option<usize>>,
    pub diagnostics: Vec<String>,
}

/// Outcome of building the unconstrained program.
#[derive(Debug, Clone, PartialEq)]
pub enum Unconstrained {
    Program(Box<RelaxationProgram>),
    /// `Δ(f) = ∅`: the bound is `f(0)`.
    Constant(f64),
    /// The program has no feasible point; the reason is given.
    NegInfinity(String),
}

/// Sparse monomial `exp(logc) · Π x_v^e` used while building.
#[derive(Debug, Clone)]
struct Mono {
    logc: f64,
    exps: Vec<(usize, f64)>,
}

fn mono(logc: f64, parts: &[&[(usize, f64)]]) -> Mono {
    Mono {
        logc,
        exps: parts.iter().flat_map(|p| p.iter().copied()).collect(),
    }
}

fn scaled(e: &[(usize, f64)], k: f64) -> Vec<(usize, f64)> {
    e.iter().map(|&(v, a)| (v, a * k)).collect()
}

/// The program whose optimum `ρ(f)` gives `f_gp = f(0) − ρ(f)`.
pub fn build_unconstrained(f: &SparsePolynomial, d: u32) -> Result<Unconstrained, BoundError> {
    let sets = index_sets(f, d)?;
    if sets.delta.is_empty() {
        return Ok(Unconstrained::Constant(f.constant_term()));
    }
    for (i, &top) in sets.top.iter().enumerate() {
        if top < 0.0 {
            return Ok(Unconstrained::NegInfinity(format!(
                "f_{{d,{}}} = {top} < 0",
                i + 1
            )));
        }
        if top == 0.0 && sets.delta.iter().any(|a| a.entries()[i] > 0) {
            return Ok(Unconstrained::NegInfinity(format!(
                "f_{{d,{}}} = 0 while a non-square term involves x{}",
                i + 1,
                i + 1
            )));
        }
    }
    let problem = SemialgebraicProblem::unconstrained(f.clone(), Some(d))?;
    let prog =
        assemble(&problem, &TransformMatrix::identity(0)).expect("top coefficients checked above");
    Ok(Unconstrained::Program(Box::new(prog)))
}

/// Builds the relaxation for `problem` (normalized first) under `A`.
pub fn build_relaxation(
    problem: &SemialgebraicProblem,
    a: &TransformMatrix,
) -> Result<RelaxationProgram, HypothesisViolation> {
    let (work, dropped) = problem.normalized();
    let mut prog = assemble(&work, a)?;
    prog.diagnostics.splice(0..0, dropped_notes(&dropped));
    Ok(prog)
}

fn dropped_notes(dropped: &[(usize, Vec<ExponentVector>)]) -> Vec<String> {
    dropped
        .iter()
        .map(|(j, alphas)| {
            let list: Vec<String> = alphas.iter().map(|a| a.to_string()).collect();
            format!("normalization dropped terms {} from g_{j}", list.join(", "))
        })
        .collect()
}

fn assemble(
    problem: &SemialgebraicProblem,
    a: &TransformMatrix,
) -> Result<RelaxationProgram, HypothesisViolation> {
    let hyp = check_gp_hypothesis(problem, a)?;
    let h = transformed_generators(problem, a);
    let m = problem.m();
    let d = problem.d;
    let df = d as f64;
    let delta = delta_union(problem);
    let mut diagnostics = Vec::new();

    let mut next = 0usize;
    let mut z_index: BTreeMap<(ExponentVector, usize), usize> = BTreeMap::new();
    for alpha in &delta {
        for i in alpha.support() {
            z_index.insert((alpha.clone(), i), next);
            next += 1;
        }
    }
    let mu_var: Vec<usize> = (0..m).map(|k| next + k).collect();
    next += m;
    let mu_mono = |k: usize| -> Vec<(usize, f64)> {
        if k == 0 {
            Vec::new()
        } else {
            vec![(mu_var[k - 1], 1.0)]
        }
    };

    let mut objective: Vec<Mono> = Vec::new();
    let mut constraints: Vec<Vec<Mono>> = Vec::new();
    for (j, hj) in h.iter().enumerate().skip(1) {
        let c0 = hj.constant_term();
        if c0 > 0.0 {
            objective.push(mono(c0.ln(), &[&mu_mono(j)]));
        }
    }

    let mut w_vars = Vec::new();
    for alpha in &delta {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (k, hk) in h.iter().enumerate() {
            let c = hk.coefficient(alpha);
            if c < 0.0 {
                plus.push((k, -c));
            } else if c > 0.0 {
                minus.push((k, c));
            }
        }
        let (log_w, w_exps, source) = match (plus.len(), minus.len()) {
            (0, 0) => {
                diagnostics.push(format!("H(mu)_{alpha} vanishes identically; term omitted"));
                continue;
            }
            (1, 0) | (0, 1) => {
                let (k, kappa) = plus.first().or(minus.first()).copied().expect("one side");
                let src = WSource::Fixed {
                    coefficient: kappa,
                    mu: (k > 0).then_some(k),
                };
                (kappa.ln(), mu_mono(k), src)
            }
            _ => {
                let w = next;
                next += 1;
                for side in [&plus, &minus] {
                    if !side.is_empty() {
                        constraints.push(
                            side.iter()
                                .map(|&(k, c)| mono(c.ln(), &[&mu_mono(k), &[(w, -1.0)]]))
                                .collect(),
                        );
                    }
                }
                (0.0, vec![(w, 1.0)], WSource::Variable(w))
            }
        };
        w_vars.push((alpha.clone(), source));

        let order = alpha.order();
        let log_alpha: f64 = alpha
            .entries()
            .iter()
            .filter(|&&ai| ai > 0)
            .map(|&ai| ai as f64 * (ai as f64).ln())
            .sum();
        let z_part: Vec<(usize, f64)> = alpha
            .support()
            .map(|i| (z_index[&(alpha.clone(), i)], alpha.entries()[i] as f64))
            .collect();
        let base = df * (log_w - df.ln()) + log_alpha;
        if order < d {
            let e = (d - order) as f64;
            objective.push(mono(
                e.ln() + base / e,
                &[&scaled(&w_exps, df / e), &scaled(&z_part, -1.0 / e)],
            ));
        } else {
            constraints.push(vec![mono(
                base,
                &[&scaled(&w_exps, df), &scaled(&z_part, -1.0)],
            )]);
        }
    }

    for (i, owner) in hyp.column_owner.iter().enumerate() {
        let Some(j) = *owner else { continue };
        let c = -h[j].top_coefficient(i, d);
        let inv_mu_j = scaled(&mu_mono(j), -1.0);
        let mut terms: Vec<Mono> = delta
            .iter()
            .filter(|a| a.entries()[i] > 0)
            .map(|a| mono(-c.ln(), &[&[(z_index[&(a.clone(), i)], 1.0)], &inv_mu_j]))
            .collect();
        for (k, hk) in h.iter().enumerate() {
            let v = hk.top_coefficient(i, d);
            if k != j && v > 0.0 {
                terms.push(mono((v / c).ln(), &[&mu_mono(k), &inv_mu_j]));
            }
        }
        if !terms.is_empty() {
            constraints.push(terms);
        }
    }

    for (j, pivot) in hyp.row_pivot.iter().enumerate() {
        let Some(p) = *pivot else { continue };
        let row = &a.rows()[j + 1];
        let inv = scaled(&mu_mono(p), -1.0);
        let terms: Vec<Mono> = (0..=m)
            .filter(|&k| k != p && row[k] < 0.0)
            .map(|k| mono((-row[k] / row[p]).ln(), &[&mu_mono(k), &inv]))
            .collect();
        if !terms.is_empty() {
            constraints.push(terms);
        }
    }

    // Drop variables that appear nowhere and renumber.
    let mut used = vec![false; next];
    for t in objective.iter().chain(constraints.iter().flatten()) {
        for &(v, e) in &t.exps {
            if e != 0.0 {
                used[v] = true;
            }
        }
    }
    let mut remap = vec![usize::MAX; next];
    let mut count = 0;
    for v in 0..next {
        if used[v] {
            remap[v] = count;
            count += 1;
        }
    }
    let dense = |t: &Mono| {
        let mut e = vec![0.0; count];
        for &(v, a) in &t.exps {
            if a != 0.0 {
                e[remap[v]] += a;
            }
        }
        MonomialFunction::from_log(t.logc, e)
    };
    let mut names = vec![String::new(); count];
    for ((alpha, i), &v) in &z_index {
        if used[v] {
            names[remap[v]] = format!("z{alpha},{}", i + 1);
        }
    }
    for (k, &v) in mu_var.iter().enumerate() {
        if used[v] {
            names[remap[v]] = format!("mu{}", k + 1);
        }
    }
    let w_vars: Vec<(ExponentVector, WSource)> = w_vars
        .into_iter()
        .map(|(alpha, src)| {
            let src = match src {
                WSource::Variable(v) => {
                    names[remap[v]] = format!("w{alpha}");
                    WSource::Variable(remap[v])
                }
                fixed => fixed,
            };
            (alpha, src)
        })
        .collect();

    let gp = GeometricProgram {
        var_count: count,
        objective: Posynomial::new(objective.iter().map(dense).collect()),
        ineq: constraints
            .iter()
            .map(|c| Posynomial::new(c.iter().map(dense).collect()))
            .collect(),
        eq: Vec::new(),
        var_names: names,
    };
    Ok(RelaxationProgram {
        gp,
        offset: -h[0].constant_term(),
        matrix: a.clone(),
        z_vars: z_index
            .into_iter()
            .filter(|(_, v)| used[*v])
            .map(|((alpha, i), v)| (alpha, i, remap[v]))
            .collect(),
        w_vars,
        mu_vars: mu_var.iter().map(|&v| used[v].then(|| remap[v])).collect(),
        diagnostics,
    })
}

/// Solves a built relaxation; `Bound` carries `offset − ρ`.
pub fn solve_relaxation(prog: &RelaxationProgram, tol: f64) -> BoundResult {
    let mut diagnostics = prog.diagnostics.clone();
    let r = match gp::solve(&prog.gp, tol) {
        Ok(r) => r,
        Err(e) => {
            diagnostics.push(format!("solver rejected the program: {e}"));
            return BoundResult {
                diagnostics,
                ..BoundResult::bare(BoundStatus::Infeasible, None)
            };
        }
    };
    log::debug!(
        "relaxation: {} vars, {} constraints, status {:?}, {} Newton steps",
        prog.gp.var_count,
        prog.gp.ineq.len(),
        r.status,
        r.iterations
    );
    if r.status == GpStatus::Infeasible {
        diagnostics.push("the geometric program is infeasible".into());
        return BoundResult {
            gp_status: Some(r.status),
            diagnostics,
            ..BoundResult::bare(BoundStatus::Infeasible, None)
        };
    }
    match r.status {
        GpStatus::MaxIter => diagnostics.push(format!(
            "iteration cap reached; bound taken at the last feasible iterate (gap ≤ {:.1e})",
            r.log_gap
        )),
        GpStatus::Unbounded => diagnostics.push("objective tends to 0; rho taken as 0+".into()),
        _ => {}
    }
    if r.constraint_shift > 0.0 {
        diagnostics.push(format!(
            "feasible set has empty interior; constraints relaxed by {:.1e} on the log scale",
            r.constraint_shift
        ));
    }
    let x = &r.point;
    let mu: Vec<f64> = prog
        .mu_vars
        .iter()
        .map(|v| v.map_or(1.0, |v| x[v]))
        .collect();
    let lambda = prog.matrix.multipliers(&mu);
    for (j, l) in lambda.iter().enumerate() {
        if *l < -1e-9 {
            diagnostics.push(format!("recovered lambda_{} = {l:e} is negative", j + 1));
        }
    }
    let witness = Witness {
        z: prog
            .z_vars
            .iter()
            .map(|(alpha, i, v)| ZEntry {
                alpha: alpha.clone(),
                i: i + 1,
                value: x[*v],
            })
            .collect(),
        w: prog
            .w_vars
            .iter()
            .map(|(alpha, src)| WEntry {
                alpha: alpha.clone(),
                value: match src {
                    WSource::Variable(v) => x[*v],
                    WSource::Fixed { coefficient, mu: k } => {
                        coefficient * k.map_or(1.0, |k| mu[k - 1])
                    }
                },
            })
            .collect(),
        mu,
        lambda,
    };
    BoundResult {
        value: Some(prog.offset - r.value),
        witness: Some(witness),
        gp_status: Some(r.status),
        diagnostics,
        ..BoundResult::bare(BoundStatus::Bound, None)
    }
}

/// `f_gp = f(0) − ρ(f)`, a lower bound for `f` on `ℝⁿ`.
pub fn lower_bound_unconstrained(f: &SparsePolynomial, d: u32) -> Result<BoundResult, BoundError> {
    unconstrained_with(f, d, BoundOptions::default().tol)
}

fn unconstrained_with(f: &SparsePolynomial, d: u32, tol: f64) -> Result<BoundResult, BoundError> {
    let mut res = match build_unconstrained(f, d)? {
        Unconstrained::Constant(c) => BoundResult {
            witness: Some(Witness::default()),
            diagnostics: vec!["no non-square terms; bound is f(0)".into()],
            ..BoundResult::bare(BoundStatus::Bound, Some(c))
        },
        Unconstrained::NegInfinity(reason) => BoundResult {
            diagnostics: vec![reason],
            ..BoundResult::bare(BoundStatus::NegInfinity, None)
        },
        Unconstrained::Program(p) => {
            let mut r = solve_relaxation(&p, tol);
            if r.status == BoundStatus::Infeasible {
                r.status = BoundStatus::NegInfinity;
            }
            r
        }
    };
    res.theorem_path = Some(TheoremPath::Unconstrained);
    res.matrix = Some(TransformMatrix::identity(0));
    Ok(res)
}

/// Lower bound for `f` on `K_g` with the automatic path and default
/// tolerance. `a` (or the problem's own matrix) is used when given.
pub fn lower_bound_constrained(
    problem: &SemialgebraicProblem,
    a: Option<&TransformMatrix>,
) -> BoundResult {
    lower_bound_with(problem, a, &BoundOptions::default()).expect("default options are valid")
}

fn run_path(
    work: &SemialgebraicProblem,
    a: TransformMatrix,
    path: TheoremPath,
    tol: f64,
) -> Result<BoundResult, HypothesisViolation> {
    let prog = assemble(work, &a)?;
    let mut r = solve_relaxation(&prog, tol);
    r.theorem_path = Some(path);
    r.matrix = Some(a);
    Ok(r)
}

pub fn lower_bound_with(
    problem: &SemialgebraicProblem,
    a: Option<&TransformMatrix>,
    opts: &BoundOptions,
) -> Result<BoundResult, BoundError> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-2) {
        return Err(BoundError::Tolerance(opts.tol));
    }
    let (work, dropped) = if opts.normalize {
        problem.normalized()
    } else {
        (problem.clone(), Vec::new())
    };
    let mut notes = dropped_notes(&dropped);
    let user = a.or(problem.a.as_ref());
    if let Some(u) = user {
        if u.m() != problem.m() {
            return Err(BoundError::MatrixSize {
                expected: problem.m() + 1,
                found: u.m() + 1,
            });
        }
    }

    let attempt = |a: Result<TransformMatrix, HypothesisViolation>, path| {
        a.and_then(|a| run_path(&work, a, path, opts.tol))
    };
    let mut result = if work.m() == 0 && !matches!(opts.path, PathChoice::M1 | PathChoice::M2) {
        unconstrained_with(&work.f, work.d, opts.tol)?
    } else {
        match opts.path {
            PathChoice::Auto => {
                if let Some(u) = user {
                    attempt(Ok(u.clone()), TheoremPath::UserMatrix).unwrap_or_else(|v| {
                        BoundResult::not_a_gp(vec![format!("supplied matrix: {v}")])
                    })
                } else {
                    let mut failures = Vec::new();
                    let mut found = None;
                    let chain: [(TheoremPath, fn(&SemialgebraicProblem) -> _); 4] = [
                        (TheoremPath::Canonical, canonical_matrix),
                        (TheoremPath::M1, matrix_for_m1),
                        (TheoremPath::M2, matrix_for_m2),
                        (TheoremPath::Identity, |p: &SemialgebraicProblem| {
                            Ok(TransformMatrix::identity(p.m()))
                        }),
                    ];
                    for (path, make) in chain {
                        match attempt(make(&work), path) {
                            Ok(r) => {
                                found = Some(r);
                                break;
                            }
                            Err(v) => failures.push(format!("{}: {v}", path_name(path))),
                        }
                    }
                    match found {
                        Some(mut r) => {
                            r.diagnostics.splice(0..0, failures);
                            r
                        }
                        None => BoundResult::not_a_gp(failures),
                    }
                }
            }
            PathChoice::Canonical => {
                single(attempt(canonical_matrix(&work), TheoremPath::Canonical))
            }
            PathChoice::M1 => single(attempt(matrix_for_m1(&work), TheoremPath::M1)),
            PathChoice::M2 => single(attempt(matrix_for_m2(&work), TheoremPath::M2)),
            PathChoice::Identity => single(attempt(
                Ok(TransformMatrix::identity(work.m())),
                TheoremPath::Identity,
            )),
            PathChoice::Subset => match select_generator_subset(&work) {
                None => BoundResult::not_a_gp(vec![
                    "no subset of at most 8 generators satisfies (*) or (†)".into(),
                ]),
                Some(s) => {
                    let sub = work.subproblem(&s.indices);
                    let a = match s.condition {
                        SubsetCondition::Star => canonical_matrix(&sub),
                        SubsetCondition::Dagger => Ok(TransformMatrix::identity(sub.m())),
                    };
                    let mut r =
                        single(a.and_then(|a| run_path(&sub, a, TheoremPath::Subset, opts.tol)));
                    r.generator_subset = Some(s.indices.iter().map(|j| j + 1).collect());
                    r
                }
            },
        }
    };
    notes.append(&mut result.diagnostics);
    result.diagnostics = notes;
    Ok(result)
}

fn single(r: Result<BoundResult, HypothesisViolation>) -> BoundResult {
    r.unwrap_or_else(|v| BoundResult::not_a_gp(vec![v.to_string()]))
}

fn path_name(p: TheoremPath) -> &'static str {
    match p {
        TheoremPath::Unconstrained => "unconstrained",
        TheoremPath::Canonical => "canonical",
        TheoremPath::M1 => "m1",
        TheoremPath::M2 => "m2",
        TheoremPath::Identity => "identity",
        TheoremPath::UserMatrix => "user matrix",
        TheoremPath::Subset => "subset",
    }
}
