#![allow(dead_code)]

use gpbound::bounds::{BoundResult, BoundStatus, SemialgebraicProblem};
use gpbound::gp::{GeometricProgram, MonomialFunction, Posynomial};
use gpbound::poly::{parse_polynomial, SparsePolynomial};
use gpbound::verify::{verify_bound, VerifyOptions, VerifyReport};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn poly(s: &str, n: usize) -> SparsePolynomial {
    parse_polynomial(s, Some(n)).unwrap()
}

pub fn problem(f: &str, g: &[&str], n: usize, d: u32) -> SemialgebraicProblem {
    SemialgebraicProblem::new(poly(f, n), g.iter().map(|s| poly(s, n)).collect(), Some(d)).unwrap()
}

/// Checks a `Bound` result against 1000 points of `K_g` and the sign of the
/// recovered multipliers. `sample_box` overrides the problem's box.
pub fn assert_sound(
    p: &SemialgebraicProblem,
    r: &BoundResult,
    sample_box: Option<Vec<f64>>,
) -> VerifyReport {
    assert_eq!(r.status, BoundStatus::Bound, "{r:?}");
    let value = r.value.unwrap();
    if let Some(w) = &r.witness {
        assert!(
            w.lambda.iter().all(|&l| l >= -1e-9),
            "negative multiplier: {:?}",
            w.lambda
        );
    }
    let opts = VerifyOptions {
        sample_box,
        ..VerifyOptions::default()
    };
    let rep = verify_bound(p, value, &opts).unwrap();
    assert!(rep.accepted > 0, "no points of K_g sampled");
    assert!(rep.passed, "bound {value} violated: {rep:?}");
    assert!(rep.margin.unwrap() >= -1e-6);
    rep
}

/// `random_polynomial` with `t` capped at the number of monomials of degree ≤ d.
pub fn random_f(rng: &mut ChaCha8Rng, n: usize, d: u32, t: usize) -> SparsePolynomial {
    let mut count = 1usize;
    for i in 1..=n {
        count = count * (d as usize + i) / i;
    }
    gpbound::bench::random_polynomial(rng, n, d, t.min(count)).unwrap()
}

/// `c0 + c1·x1 + ⋯ + ck·xk` as text.
pub fn affine(c: &[f64]) -> String {
    let mut s = format!("{}", c[0]);
    for (i, v) in c[1..].iter().enumerate() {
        s += &format!(" {v:+}*x{}", i + 1);
    }
    s
}

fn mono(c: f64, e: &[f64]) -> MonomialFunction {
    MonomialFunction::new(c, e.to_vec()).unwrap()
}

/// A random 3-variable GP with a coercive objective, feasible at x = 1 with
/// every constraint at most `slack` there.
pub fn random_gp(rng: &mut ChaCha8Rng, slack: f64) -> GeometricProgram {
    let k = 3;
    let mut terms = Vec::new();
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = rng.gen_range(0.5..2.0);
        terms.push(mono(rng.gen_range(0.1..3.0), &e));
        e[i] = -rng.gen_range(0.5..2.0);
        terms.push(mono(rng.gen_range(0.1..3.0), &e));
    }
    for _ in 0..rng.gen_range(0..3) {
        let e: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        terms.push(mono(rng.gen_range(0.1..2.0), &e));
    }
    let mut gp = GeometricProgram::new(k);
    gp.objective = Posynomial::new(terms);
    for _ in 0..rng.gen_range(1..3) {
        let count = rng.gen_range(1..4);
        let weights: Vec<f64> = (0..count).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let cons = weights
            .iter()
            .map(|w| {
                let e: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
                mono(slack * w / total, &e)
            })
            .collect();
        gp.ineq.push(Posynomial::new(cons));
    }
    gp
}

/// Least objective over feasible points of a log-space grid on `[−lim, lim]^3`
/// with spacing `step`, centred at `center`.
fn grid_min(gp: &GeometricProgram, center: [f64; 3], lim: f64, step: f64) -> (f64, [f64; 3]) {
    let count = (2.0 * lim / step).round() as i64;
    let mut best = (f64::INFINITY, center);
    let mut x = [0.0; 3];
    let feasible = |x: &[f64]| gp.ineq.iter().all(|c| c.eval(x) <= 1.0);
    for a in 0..=count {
        let ua = center[0] - lim + a as f64 * step;
        x[0] = ua.exp();
        for b in 0..=count {
            let ub = center[1] - lim + b as f64 * step;
            x[1] = ub.exp();
            for c in 0..=count {
                let uc = center[2] - lim + c as f64 * step;
                x[2] = uc.exp();
                let v = gp.objective.eval(&x);
                if v < best.0 && feasible(&x) {
                    best = (v, [ua, ub, uc]);
                }
            }
        }
    }
    best
}

/// Grid search over `[−20, 20]^3` in log space at spacing 0.25, refined
/// around the best point down to spacing 0.01.
pub fn grid_oracle(gp: &GeometricProgram) -> f64 {
    let (mut v, mut c) = grid_min(gp, [0.0; 3], 20.0, 0.25);
    for (lim, step) in [(0.5, 0.02), (0.05, 0.01)] {
        let (w, d) = grid_min(gp, c, lim, step);
        if w < v {
            v = w;
            c = d;
        }
    }
    v
}

/// Every entry positive, entries summing to `order`.
pub fn random_alpha(rng: &mut ChaCha8Rng, n: usize, order: u32) -> Vec<u32> {
    let mut a = vec![1u32; n];
    for _ in n as u32..order {
        a[rng.gen_range(0..n)] += 1;
    }
    a
}
