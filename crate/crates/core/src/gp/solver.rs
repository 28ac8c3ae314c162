//! Two-phase log-barrier method with damped Newton steps.
//!
//! Equalities are eliminated first by restricting to their solution set.
//! Phase 1 minimizes `s` subject to `F_j(v) ≤ s`; phase 2 follows the
//! central path of `t·F_0 − Σ log(−F_j)` with `t` growing geometrically.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::transform::{equality_subspace, restrict, ConvexProgram, ExpAffine, LogSumExp};
use super::{log_transform, GeometricProgram, GpError};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Target duality gap on the log scale.
    pub tol: f64,
    /// Cap on Newton steps over both phases.
    pub max_iter: usize,
    /// `log` of the objective below which the program counts as unbounded.
    pub log_floor: f64,
    /// Phase-1 optimum above this is reported infeasible.
    pub feas_tol: f64,
    /// Barrier parameter growth per outer step.
    pub t_factor: f64,
    /// Log-scale variables are kept in `(−log_box, log_box)`. Without the box
    /// a constraint that can be driven to `−∞` leaves the barrier unbounded.
    pub log_box: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 5000,
            log_floor: -50.0,
            feas_tol: 1e-9,
            t_factor: 10.0,
            log_box: 120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpStatus {
    Optimal,
    Infeasible,
    /// The objective tends to 0 along a feasible ray.
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpResult {
    pub status: GpStatus,
    /// Objective at `point`; 0 for a feasibility problem.
    pub value: f64,
    pub point: Vec<f64>,
    /// `‖∇F_0 + Σ λ_j ∇F_j‖_∞` in log variables at the returned point.
    pub kkt_residual: f64,
    /// Upper bound on `log value − log optimum` from the barrier.
    pub log_gap: f64,
    /// Amount by which the log constraints were relaxed when the feasible
    /// set had empty interior; 0 otherwise.
    pub constraint_shift: f64,
    /// Multipliers for the nonempty inequality constraints, in order.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

pub fn solve(gp: &GeometricProgram, tol: f64) -> Result<GpResult, GpError> {
    solve_with(
        gp,
        &SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_with(gp: &GeometricProgram, opts: &SolverOptions) -> Result<GpResult, GpError> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-2) {
        return Err(GpError::Tolerance(opts.tol));
    }
    gp.validate()?;
    let cp = log_transform(gp);
    let sub = match equality_subspace(&cp) {
        Ok(s) => s,
        Err(base) => {
            log::debug!("gp: equality constraints are inconsistent");
            return Ok(infeasible(&cp, base, 0));
        }
    };
    let prog = restrict(&cp, &sub);
    let mut budget = Budget {
        used: 0,
        cap: opts.max_iter,
    };
    let m = prog.inequalities.len();

    let mut v = vec![0.0; prog.var_count];
    let mut shift = 0.0;
    if m > 0 && prog.max_inequality(&v) >= -0.1 {
        match phase_one(&prog, opts, &mut budget) {
            PhaseOne::Feasible(p) => v = p,
            PhaseOne::Marginal(p, s) => {
                shift = s.max(0.0) + 1e-8;
                log::debug!("gp: feasible set has empty interior, relaxing by {shift:e}");
                v = p;
            }
            PhaseOne::Infeasible(p) => {
                let u = sub.lift(&p);
                log::debug!("gp: phase 1 certifies infeasibility");
                return Ok(infeasible(&cp, u, budget.used));
            }
            PhaseOne::OutOfBudget(p) => {
                let u = sub.lift(&p);
                let mut r = infeasible(&cp, u, budget.used);
                r.status = GpStatus::MaxIter;
                return Ok(r);
            }
        }
    }

    if prog.objective.is_none() {
        let u = sub.lift(&v);
        return Ok(GpResult {
            status: GpStatus::Optimal,
            value: 0.0,
            point: ConvexProgram::to_gp_point(&u),
            kkt_residual: 0.0,
            log_gap: 0.0,
            constraint_shift: shift,
            duals: vec![0.0; m],
            iterations: budget.used,
        });
    }

    let floor = opts.log_floor;
    let mut barrier = Barrier::new(&prog, shift, opts.log_box, prog.var_count);
    let exit = barrier.run(&mut v, opts.tol, opts, &mut budget, |state| {
        (state.f0 < floor).then_some(Stop::Unbounded)
    });
    let status = match exit {
        Exit::Converged => GpStatus::Optimal,
        Exit::Stopped(Stop::Unbounded) => GpStatus::Unbounded,
        Exit::Stopped(_) => unreachable!("phase 2 only stops on unboundedness"),
        Exit::OutOfBudget => GpStatus::MaxIter,
    };
    let u = sub.lift(&v);
    let f0 = barrier.prog.objective.as_ref().map_or(0.0, |f| f.eval(&v));
    let (kkt_residual, duals) = barrier.kkt(&v);
    Ok(GpResult {
        status,
        value: f0.exp(),
        point: ConvexProgram::to_gp_point(&u),
        kkt_residual,
        log_gap: barrier.barrier_count() / barrier.t,
        constraint_shift: shift,
        duals,
        iterations: budget.used,
    })
}

fn infeasible(cp: &ConvexProgram, u: Vec<f64>, iterations: usize) -> GpResult {
    let value = cp.objective.as_ref().map_or(0.0, |f| f.eval(&u).exp());
    GpResult {
        status: GpStatus::Infeasible,
        value,
        point: ConvexProgram::to_gp_point(&u),
        kkt_residual: f64::NAN,
        log_gap: f64::INFINITY,
        constraint_shift: 0.0,
        duals: Vec::new(),
        iterations,
    }
}

struct Budget {
    used: usize,
    cap: usize,
}

enum PhaseOne {
    Feasible(Vec<f64>),
    Marginal(Vec<f64>, f64),
    Infeasible(Vec<f64>),
    OutOfBudget(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stop {
    Unbounded,
    Feasible,
    Infeasible,
}

enum Exit {
    Converged,
    Stopped(Stop),
    OutOfBudget,
}

struct State<'a> {
    x: &'a [f64],
    f0: f64,
    t: f64,
    centered: bool,
}

/// `min s  s.t.  F_j(v) − s ≤ 0`, started at `s = max_j F_j(0) + 1`.
fn phase_one(prog: &ConvexProgram, opts: &SolverOptions, budget: &mut Budget) -> PhaseOne {
    let k = prog.var_count;
    let aux = ConvexProgram {
        var_count: k + 1,
        objective: Some(LogSumExp::new(vec![ExpAffine {
            offset: 0.0,
            coeffs: vec![(k, 1.0)],
        }])),
        inequalities: prog
            .inequalities
            .iter()
            .map(|f| {
                LogSumExp::new(
                    f.terms
                        .iter()
                        .map(|t| {
                            let mut coeffs = t.coeffs.clone();
                            coeffs.push((k, -1.0));
                            ExpAffine {
                                offset: t.offset,
                                coeffs,
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
        equalities: Vec::new(),
    };
    let mut x = vec![0.0; k + 1];
    x[k] = prog.max_inequality(&x[..k]) + 1.0;
    // The objective is e^s, so s itself is the log objective f0.
    let feas_tol = opts.feas_tol;
    let mut barrier = Barrier::new(&aux, 0.0, opts.log_box, k);
    let m = barrier.barrier_count();
    let exit = barrier.run(&mut x, feas_tol / 10.0, opts, budget, |st: &State| {
        let v = &st.x[..k];
        if prog.max_inequality(v) < -0.1 {
            return Some(Stop::Feasible);
        }
        (st.centered && st.f0 - m / st.t > feas_tol).then_some(Stop::Infeasible)
    });
    x.truncate(k);
    match exit {
        Exit::Stopped(Stop::Feasible) => PhaseOne::Feasible(x),
        Exit::Stopped(Stop::Infeasible) => PhaseOne::Infeasible(x),
        Exit::Stopped(Stop::Unbounded) => unreachable!("phase 1 has no floor"),
        Exit::OutOfBudget => PhaseOne::OutOfBudget(x),
        Exit::Converged => {
            let s = prog.max_inequality(&x);
            if s < -feas_tol {
                PhaseOne::Feasible(x)
            } else if s <= feas_tol {
                PhaseOne::Marginal(x, s)
            } else {
                PhaseOne::Infeasible(x)
            }
        }
    }
}

const MAX_STEP: f64 = 20.0;
const MAX_CENTERING_STEPS: usize = 200;
const MAX_POLISH_STEPS: usize = 20;

/// Scratch data for one barrier run.
struct Barrier<'a> {
    prog: &'a ConvexProgram,
    shift: f64,
    /// Half-width of the box on the first `boxed` variables.
    radius: f64,
    boxed: usize,
    t: f64,
    /// Softmax weights per block at the current point (objective first).
    probs: Vec<Vec<f64>>,
    /// Block values at the current point.
    vals: Vec<f64>,
    /// Per-block gradient scratch, indexed by variable.
    scratch: Vec<f64>,
}

impl<'a> Barrier<'a> {
    fn new(prog: &'a ConvexProgram, shift: f64, radius: f64, boxed: usize) -> Self {
        let blocks = 1 + prog.inequalities.len();
        Barrier {
            prog,
            shift,
            radius,
            boxed,
            t: 1.0,
            probs: vec![Vec::new(); blocks],
            vals: vec![0.0; blocks],
            scratch: vec![0.0; prog.var_count],
        }
    }

    /// Number of log terms in the barrier, which bounds the gap by `count/t`.
    fn barrier_count(&self) -> f64 {
        (self.prog.inequalities.len() + 2 * self.boxed) as f64
    }

    fn blocks(&self) -> impl Iterator<Item = (usize, &'a LogSumExp)> {
        let prog = self.prog;
        prog.objective.iter().map(|f| (0, f)).chain(
            prog.inequalities
                .iter()
                .enumerate()
                .map(|(j, f)| (j + 1, f)),
        )
    }

    /// Refreshes block values and weights. Returns `false` outside the domain.
    fn refresh(&mut self, x: &[f64]) -> bool {
        let blocks: Vec<_> = self.blocks().collect();
        for (b, f) in blocks {
            self.vals[b] = f.eval_probs(x, &mut self.probs[b]);
        }
        self.vals[1..].iter().all(|&v| v < self.shift)
            && x[..self.boxed].iter().all(|v| v.abs() < self.radius)
    }

    fn f0(&self) -> f64 {
        if self.prog.objective.is_some() {
            self.vals[0]
        } else {
            0.0
        }
    }

    /// Gradient and Hessian of `t·F_0 + Σ −log(shift − F_j)`.
    fn derivatives(&mut self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let k = self.prog.var_count;
        let mut grad = DVector::zeros(k);
        let mut hess = DMatrix::zeros(k, k);
        for i in 0..self.boxed {
            let (a, b) = (1.0 / (self.radius - x[i]), 1.0 / (self.radius + x[i]));
            grad[i] += a - b;
            hess[(i, i)] += a * a + b * b;
        }
        let blocks: Vec<_> = self.blocks().collect();
        for (b, f) in blocks {
            let (w_pp, w_gg, w_g) = if b == 0 {
                (self.t, -self.t, self.t)
            } else {
                let r = 1.0 / (self.shift - self.vals[b]);
                (r, r * r - r, r)
            };
            for &i in f.support() {
                self.scratch[i] = 0.0;
            }
            f.add_gradient(&self.probs[b], 1.0, &mut self.scratch);
            for &i in f.support() {
                grad[i] += w_g * self.scratch[i];
            }
            f.add_hessian(&self.probs[b], &self.scratch, w_pp, w_gg, &mut hess);
        }
        hess.fill_lower_triangle_with_upper_triangle();
        (grad, hess)
    }

    /// `ψ(x + α dx) − ψ(x)`, or `None` if the step leaves the domain.
    fn increment(&self, x: &[f64], dx: &[f64], slopes: &[Vec<f64>], alpha: f64) -> Option<f64> {
        let mut delta = 0.0;
        for i in 0..self.boxed {
            let (up, down) = (
                alpha * dx[i] / (self.radius - x[i]),
                alpha * dx[i] / (self.radius + x[i]),
            );
            if !(up < 1.0 && down > -1.0) {
                return None;
            }
            delta -= (-up).ln_1p() + down.ln_1p();
        }
        for (b, f) in self.blocks() {
            let df = f.increment(&self.probs[b], &slopes[b], alpha);
            if b == 0 {
                delta += self.t * df;
            } else {
                let slack = self.shift - self.vals[b];
                if !(df < slack) {
                    return None;
                }
                delta -= (-df / slack).ln_1p();
            }
        }
        delta.is_finite().then_some(delta)
    }

    /// Newton iterations at fixed `t` until `λ²/2 ≤ eps`.
    fn center<S>(
        &mut self,
        x: &mut [f64],
        eps: f64,
        budget: &mut Budget,
        stop: &mut S,
    ) -> Result<(), Exit>
    where
        S: FnMut(&State) -> Option<Stop>,
    {
        let k = self.prog.var_count;
        let mut stalls = 0;
        let mut steps = 0;
        loop {
            let ok = self.refresh(x);
            debug_assert!(ok, "iterate left the barrier domain");
            let (grad, hess) = self.derivatives(x);
            let mut dx = newton_direction(hess, &grad);
            let lam2 = -grad.dot(&dx);
            // Past the step cap the decrement is limited by rounding.
            if !(lam2 > 0.0) || lam2 / 2.0 <= eps || steps >= MAX_CENTERING_STEPS {
                return Ok(());
            }
            steps += 1;
            if budget.used >= budget.cap {
                return Err(Exit::OutOfBudget);
            }
            budget.used += 1;

            // A nearly singular Hessian (a flat direction of the barrier)
            // yields enormous steps; cap them in log space.
            let scale = (MAX_STEP / dx.amax()).min(1.0);
            dx *= scale;
            let slope = scale * lam2;
            let dxs = dx.as_slice();
            let slopes: Vec<Vec<f64>> = self
                .blocks()
                .map(|(_, f)| f.terms.iter().map(|t| t.directional(dxs)).collect())
                .collect();
            let mut alpha = 1.0;
            let accepted = loop {
                if let Some(delta) = self.increment(x, dxs, &slopes, alpha) {
                    if delta <= -1e-4 * alpha * slope {
                        break true;
                    }
                    // Near the optimum the predicted decrease can be
                    // dominated by rounding; accept a full Newton step
                    // that stays in the domain.
                    if lam2 < 1e-10 && alpha == 1.0 && delta <= 1e-14 * (1.0 + self.t) {
                        break true;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-14 {
                    break false;
                }
            };
            if !accepted {
                stalls += 1;
                if stalls >= 2 {
                    return Ok(());
                }
                continue;
            }
            for i in 0..k {
                x[i] += alpha * dxs[i];
            }
            if !self.refresh(x) {
                // Rounding pushed a constraint onto its boundary.
                for i in 0..k {
                    x[i] -= alpha * dxs[i];
                }
                self.refresh(x);
                return Ok(());
            }
            let state = State {
                x,
                f0: self.f0(),
                t: self.t,
                centered: false,
            };
            if let Some(s) = stop(&state) {
                return Err(Exit::Stopped(s));
            }
        }
    }

    fn run<S>(
        &mut self,
        x: &mut [f64],
        tol: f64,
        opts: &SolverOptions,
        budget: &mut Budget,
        mut stop: S,
    ) -> Exit
    where
        S: FnMut(&State) -> Option<Stop>,
    {
        let m = self.barrier_count();
        let t_max = if m == 0.0 { 1.0 } else { m / tol };
        self.t = 1.0f64.min(t_max);
        loop {
            // Compared on `t` itself: `m / (m / tol)` can round above `tol`.
            let last = self.t >= t_max;
            let eps = if last || m == 0.0 { 1e-10 } else { 1e-8 };
            if let Err(e) = self.center(x, eps, budget, &mut stop) {
                return e;
            }
            let state = State {
                x,
                f0: self.f0(),
                t: self.t,
                centered: true,
            };
            if let Some(s) = stop(&state) {
                return Exit::Stopped(s);
            }
            if last || m == 0.0 {
                self.polish(x, tol, budget);
                return Exit::Converged;
            }
            self.t = (self.t * opts.t_factor).min(t_max);
        }
    }

    /// Newton steps at the final `t` judged by the gradient norm instead of
    /// the barrier value, which at large `t` is swamped by rounding.
    fn polish(&mut self, x: &mut [f64], tol: f64, budget: &mut Budget) {
        let k = self.prog.var_count;
        let mut trial = vec![0.0; k];
        for _ in 0..MAX_POLISH_STEPS {
            if budget.used >= budget.cap {
                return;
            }
            self.refresh(x);
            let (grad, hess) = self.derivatives(x);
            let norm = grad.amax();
            if norm / self.t <= 1e-3 * tol {
                return;
            }
            let mut dx = newton_direction(hess, &grad);
            let scale = (MAX_STEP / dx.amax()).min(1.0);
            dx *= scale;
            budget.used += 1;
            let mut alpha = 1.0;
            let accepted = loop {
                for i in 0..k {
                    trial[i] = x[i] + alpha * dx[i];
                }
                if self.refresh(&trial) && self.derivatives(&trial).0.amax() < norm {
                    break true;
                }
                alpha *= 0.5;
                if alpha < 1e-6 {
                    break false;
                }
            };
            if !accepted {
                self.refresh(x);
                return;
            }
            x.copy_from_slice(&trial);
        }
    }

    /// Residual of `∇F_0 + Σ λ_j ∇F_j` with `λ_j = 1/(t·(shift − F_j))`.
    fn kkt(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        self.refresh(x);
        let mut g = vec![0.0; self.prog.var_count];
        let mut duals = Vec::with_capacity(self.prog.inequalities.len());
        let blocks: Vec<_> = self.blocks().collect();
        for (b, f) in blocks {
            let w = if b == 0 {
                1.0
            } else {
                let l = 1.0 / (self.t * (self.shift - self.vals[b]));
                duals.push(l);
                l
            };
            f.add_gradient(&self.probs[b], w, &mut g);
        }
        (g.iter().fold(0.0, |m, v| m.max(v.abs())), duals)
    }
}

/// Solves `H dx = −g` by Cholesky, adding a growing ridge if `H` is not
/// numerically positive definite.
fn newton_direction(hess: DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let k = grad.len();
    let maxdiag = (0..k)
        .map(|i| hess[(i, i)].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut ridge = 0.0;
    loop {
        let mut h = hess.clone();
        for i in 0..k {
            h[(i, i)] += ridge;
        }
        if let Some(ch) = h.cholesky() {
            let dx = ch.solve(&(-grad));
            if dx.iter().all(|v| v.is_finite()) {
                return dx;
            }
        }
        ridge = if ridge == 0.0 {
            1e-14 * maxdiag
        } else {
            ridge * 100.0
        };
        if ridge > 1e6 * maxdiag {
            return -grad / maxdiag;
        }
    }
}
