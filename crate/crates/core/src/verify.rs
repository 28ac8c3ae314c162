//! Soundness audit: rejection sampling of `K_g` inside a box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::SemialgebraicProblem;

/// A sample with `f(x) < bound − VIOLATION_TOL` is a violation.
pub const VIOLATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Number of accepted points to draw from `K_g`.
    pub samples: usize,
    /// Draws per requested sample before giving up.
    pub attempts_per_sample: usize,
    pub seed: u64,
    /// Half-widths `N_i` of the box `∏[−N_i, N_i]`; overrides the problem's.
    pub sample_box: Option<Vec<f64>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 1000,
            attempts_per_sample: 1000,
            seed: 0,
            sample_box: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub bound: f64,
    pub sample_box: Vec<f64>,
    pub requested: usize,
    pub accepted: usize,
    pub attempts: usize,
    /// Least sampled value of `f` on `K_g`.
    pub min_value: Option<f64>,
    pub argmin: Option<Vec<f64>>,
    /// `min_value − bound`.
    pub margin: Option<f64>,
    pub violations: usize,
    /// At least one point was accepted and none violated the bound.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("no sampling box: supply one for a general K_g")]
    NoBox,
    #[error("box has {found} entries, problem has {expected} variables")]
    Dimension { expected: usize, found: usize },
    #[error("box half-width {0} must be positive and finite")]
    BadBox(f64),
    #[error("bound {0} is not finite")]
    BadBound(f64),
}

/// The explicit box if given, else the box recorded by the constructor.
pub fn sampling_box(problem: &SemialgebraicProblem, explicit: Option<&[f64]>) -> Option<Vec<f64>> {
    explicit
        .map(<[f64]>::to_vec)
        .or_else(|| problem.sample_box.clone())
}

pub fn verify_bound(
    problem: &SemialgebraicProblem,
    bound: f64,
    opts: &VerifyOptions,
) -> Result<VerifyReport, VerifyError> {
    if !bound.is_finite() {
        return Err(VerifyError::BadBound(bound));
    }
    let sample_box = sampling_box(problem, opts.sample_box.as_deref()).ok_or(VerifyError::NoBox)?;
    let n = problem.n();
    if sample_box.len() != n {
        return Err(VerifyError::Dimension {
            expected: n,
            found: sample_box.len(),
        });
    }
    if let Some(&b) = sample_box.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(VerifyError::BadBox(b));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cap = opts.samples.saturating_mul(opts.attempts_per_sample);
    let mut x = vec![0.0; n];
    let (mut accepted, mut attempts, mut violations) = (0, 0, 0);
    let mut best: Option<(f64, Vec<f64>)> = None;
    while accepted < opts.samples && attempts < cap {
        attempts += 1;
        for (xi, &b) in x.iter_mut().zip(&sample_box) {
            *xi = rng.gen_range(-b..=b);
        }
        if problem.min_generator(&x) < 0.0 {
            continue;
        }
        accepted += 1;
        let v = problem.f.eval_unchecked(&x);
        if v < bound - VIOLATION_TOL {
            violations += 1;
        }
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, x.clone()));
        }
    }
    let (min_value, argmin) = best.unzip();
    Ok(VerifyReport {
        bound,
        sample_box,
        requested: opts.samples,
        accepted,
        attempts,
        min_value,
        argmin,
        margin: min_value.map(|v| v - bound),
        violations,
        passed: accepted > 0 && violations == 0,
    })
}
