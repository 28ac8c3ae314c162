use nalgebra::DMatrix;

use super::{GeometricProgram, MonomialFunction, Posynomial};

/// `offset + Σ coeffs[k].1 · u[coeffs[k].0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpAffine {
    pub offset: f64,
    pub coeffs: Vec<(usize, f64)>,
}

impl ExpAffine {
    fn from_monomial(m: &MonomialFunction) -> Self {
        ExpAffine {
            offset: m.log_coefficient,
            coeffs: m
                .exponents
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0.0)
                .map(|(i, &a)| (i, a))
                .collect(),
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.offset + self.coeffs.iter().map(|&(i, a)| a * u[i]).sum::<f64>()
    }

    pub fn directional(&self, du: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, a)| a * du[i]).sum()
    }
}

/// `log Σ_t exp(y_t(u))`, the image of a posynomial under `x = exp(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumExp {
    pub terms: Vec<ExpAffine>,
    support: Vec<usize>,
}

impl LogSumExp {
    pub fn new(terms: Vec<ExpAffine>) -> Self {
        let mut support: Vec<usize> = terms
            .iter()
            .flat_map(|t| t.coeffs.iter().map(|&(i, _)| i))
            .collect();
        support.sort_unstable();
        support.dedup();
        LogSumExp { terms, support }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        let ys: Vec<f64> = self.terms.iter().map(|t| t.eval(u)).collect();
        log_sum_exp(&ys)
    }

    /// Value plus softmax weights at `u`. `probs` is overwritten.
    pub(crate) fn eval_probs(&self, u: &[f64], probs: &mut Vec<f64>) -> f64 {
        probs.clear();
        probs.extend(self.terms.iter().map(|t| t.eval(u)));
        let mx = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for p in probs.iter_mut() {
            *p = (*p - mx).exp();
            s += *p;
        }
        for p in probs.iter_mut() {
            *p /= s;
        }
        mx + s.ln()
    }

    /// Adds `Σ_t p_t a_t` into `grad` (only support entries are touched).
    pub(crate) fn add_gradient(&self, probs: &[f64], scale: f64, grad: &mut [f64]) {
        for (t, &p) in self.terms.iter().zip(probs) {
            for &(i, a) in &t.coeffs {
                grad[i] += scale * p * a;
            }
        }
    }

    /// Adds `w_pp · Σ_t p_t a_t a_tᵀ + w_gg · g gᵀ` into the upper triangle
    /// of `hess`, where `g` is this block's gradient (supplied in `g`, which
    /// is indexed by variable).
    pub(crate) fn add_hessian(
        &self,
        probs: &[f64],
        g: &[f64],
        w_pp: f64,
        w_gg: f64,
        hess: &mut DMatrix<f64>,
    ) {
        for (t, &p) in self.terms.iter().zip(probs) {
            let s = w_pp * p;
            if s == 0.0 {
                continue;
            }
            for &(i, ai) in &t.coeffs {
                for &(j, aj) in &t.coeffs {
                    if i <= j {
                        hess[(i, j)] += s * ai * aj;
                    }
                }
            }
        }
        if w_gg != 0.0 {
            for (a, &i) in self.support.iter().enumerate() {
                let gi = w_gg * g[i];
                if gi == 0.0 {
                    continue;
                }
                for &j in &self.support[a..] {
                    hess[(i, j)] += gi * g[j];
                }
            }
        }
    }

    /// `F(u + α du) − F(u)`, computed from the softmax weights at `u` so
    /// that small differences keep full relative precision.
    pub(crate) fn increment(&self, probs: &[f64], slopes: &[f64], alpha: f64) -> f64 {
        let big = slopes.iter().any(|s| (alpha * s).abs() > 0.5);
        if !big {
            let s: f64 = probs
                .iter()
                .zip(slopes)
                .map(|(p, s)| p * (alpha * s).exp_m1())
                .sum();
            s.ln_1p()
        } else {
            let mx = slopes
                .iter()
                .zip(probs)
                .filter(|(_, &p)| p > 0.0)
                .map(|(s, _)| alpha * s)
                .fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = probs
                .iter()
                .zip(slopes)
                .map(|(p, s)| p * (alpha * s - mx).exp())
                .sum();
            mx + s.ln()
        }
    }
}

pub(crate) fn log_sum_exp(ys: &[f64]) -> f64 {
    let mx = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + ys.iter().map(|y| (y - mx).exp()).sum::<f64>().ln()
}

/// `Σ coeffs · u = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineEquality {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// A geometric program in log variables `u = log x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProgram {
    pub var_count: usize,
    /// `None` for the zero objective.
    pub objective: Option<LogSumExp>,
    /// Each constrained `≤ 0`.
    pub inequalities: Vec<LogSumExp>,
    pub equalities: Vec<AffineEquality>,
}

impl ConvexProgram {
    /// Maps a log-space point back to GP variables.
    pub fn to_gp_point(u: &[f64]) -> Vec<f64> {
        u.iter().map(|v| v.exp()).collect()
    }

    pub fn max_inequality(&self, u: &[f64]) -> f64 {
        self.inequalities
            .iter()
            .map(|c| c.eval(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn lse_of(p: &Posynomial) -> LogSumExp {
    LogSumExp::new(p.terms.iter().map(ExpAffine::from_monomial).collect())
}

/// Substitutes `x_i = exp(u_i)`: posynomials become log-sum-exp functions,
/// monomial equalities become `log c + ⟨a, u⟩ = 0`.
pub fn log_transform(gp: &GeometricProgram) -> ConvexProgram {
    ConvexProgram {
        var_count: gp.var_count,
        objective: (!gp.objective.is_empty()).then(|| lse_of(&gp.objective)),
        inequalities: gp
            .ineq
            .iter()
            .filter(|p| !p.is_empty())
            .map(lse_of)
            .collect(),
        equalities: gp
            .eq
            .iter()
            .map(|m| {
                let e = ExpAffine::from_monomial(m);
                AffineEquality {
                    coeffs: e.coeffs,
                    rhs: -e.offset,
                }
            })
            .collect(),
    }
}

/// Parametrization `u = base + basis · v` of the affine equality set.
pub(crate) struct AffineSubspace {
    pub base: Vec<f64>,
    /// `var_count × dim`, or `None` for the identity.
    pub basis: Option<DMatrix<f64>>,
    pub dim: usize,
}

impl AffineSubspace {
    pub fn lift(&self, v: &[f64]) -> Vec<f64> {
        match &self.basis {
            None => v.to_vec(),
            Some(z) => {
                let mut u = self.base.clone();
                for (i, ui) in u.iter_mut().enumerate() {
                    for (j, vj) in v.iter().enumerate() {
                        *ui += z[(i, j)] * vj;
                    }
                }
                u
            }
        }
    }
}

/// Solves the equality system. Returns `Err(base)` with the least-squares
/// point when the system is inconsistent.
pub(crate) fn equality_subspace(cp: &ConvexProgram) -> Result<AffineSubspace, Vec<f64>> {
    let k = cp.var_count;
    let p = cp.equalities.len();
    if p == 0 {
        return Ok(AffineSubspace {
            base: vec![0.0; k],
            basis: None,
            dim: k,
        });
    }
    let rows = p.max(k);
    let mut e = DMatrix::<f64>::zeros(rows, k);
    let mut r = nalgebra::DVector::<f64>::zeros(rows);
    for (row, eqn) in cp.equalities.iter().enumerate() {
        for &(i, a) in &eqn.coeffs {
            e[(row, i)] += a;
        }
        r[row] = eqn.rhs;
    }
    let svd = nalgebra::SVD::new(e.clone(), true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = 1e-10 * smax.max(1e-300);
    let base = svd.solve(&r, cut).expect("U and V were computed");
    let resid = (&e * &base - &r).amax();
    let base: Vec<f64> = base.iter().copied().collect();
    if resid > 1e-9 * (1.0 + r.amax()) {
        return Err(base);
    }
    let v_t = svd.v_t.as_ref().expect("V was computed");
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] <= cut)
        .collect();
    let mut z = DMatrix::<f64>::zeros(k, null.len());
    for (c, &j) in null.iter().enumerate() {
        for i in 0..k {
            z[(i, c)] = v_t[(j, i)];
        }
    }
    let dim = null.len();
    Ok(AffineSubspace {
        base,
        basis: Some(z),
        dim,
    })
}

fn restrict_lse(f: &LogSumExp, sub: &AffineSubspace) -> LogSumExp {
    let z = sub
        .basis
        .as_ref()
        .expect("restricting to a proper subspace");
    let terms = f
        .terms
        .iter()
        .map(|t| {
            let offset = t.offset + t.coeffs.iter().map(|&(i, a)| a * sub.base[i]).sum::<f64>();
            let mut dense = vec![0.0; sub.dim];
            for &(i, a) in &t.coeffs {
                for (j, d) in dense.iter_mut().enumerate() {
                    *d += a * z[(i, j)];
                }
            }
            let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let coeffs = dense
                .into_iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > 1e-14 * scale)
                .collect();
            ExpAffine { offset, coeffs }
        })
        .collect();
    LogSumExp::new(terms)
}

/// The program restricted to the equality subspace, without equalities.
pub(crate) fn restrict(cp: &ConvexProgram, sub: &AffineSubspace) -> ConvexProgram {
    if sub.basis.is_none() {
        return ConvexProgram {
            equalities: Vec::new(),
            ..cp.clone()
        };
    }
    ConvexProgram {
        var_count: sub.dim,
        objective: cp.objective.as_ref().map(|f| restrict_lse(f, sub)),
        inequalities: cp
            .inequalities
            .iter()
            .map(|f| restrict_lse(f, sub))
            .collect(),
        equalities: Vec::new(),
    }
}
