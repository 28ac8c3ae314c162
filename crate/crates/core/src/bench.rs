//! Random partition problems and a timing harness.
//!
//! Each instance is `f` with `t` distinct terms of degree at most `d` and
//! coefficients uniform in `[−10, 10]`, on
//! `K = {x : 1 − Σ_{i∈I_j} x_i^d ≥ 0, j = 1..m}` for a random partition
//! `I_1, …, I_m` of the variables.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    lower_bound_with, partition_problem, BoundError, BoundOptions, BoundStatus,
    SemialgebraicProblem,
};
use crate::poly::{ExponentVector, SparsePolynomial};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub d: u32,
    pub t: usize,
    /// Number of blocks; drawn uniformly from `1..=n` per instance if `None`.
    pub m: Option<usize>,
    pub reps: usize,
    pub seed: u64,
    pub tol: f64,
}

/// A uniformly random `α ∈ ℕⁿ` with `|α| ≤ d` (stars and bars with a slack bin).
pub fn random_exponent<R: Rng>(rng: &mut R, n: usize, d: u32) -> ExponentVector {
    let slots = d as usize + n;
    let mut bars: Vec<usize> = rand::seq::index::sample(rng, slots, n).into_vec();
    bars.sort_unstable();
    let mut prev = 0;
    let entries = bars
        .iter()
        .map(|&b| {
            let a = (b - prev) as u32;
            prev = b + 1;
            a
        })
        .collect();
    ExponentVector::new(entries)
}

/// Number of `α ∈ ℕⁿ` with `|α| ≤ d`, saturating.
fn monomial_count(n: usize, d: u32) -> usize {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (d as u128 + i) / i;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

/// `t` distinct terms with nonzero coefficients in `[−10, 10]`.
pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    n: usize,
    d: u32,
    t: usize,
) -> Result<SparsePolynomial, String> {
    if t > monomial_count(n, d) {
        return Err(format!(
            "only {} monomials of degree ≤ {d} in {n} variables",
            monomial_count(n, d)
        ));
    }
    let mut terms = BTreeMap::new();
    while terms.len() < t {
        let a = random_exponent(rng, n, d);
        if terms.contains_key(&a) {
            continue;
        }
        let c: f64 = rng.gen_range(-10.0..=10.0);
        if c != 0.0 {
            terms.insert(a, c);
        }
    }
    Ok(SparsePolynomial::from_terms(n, terms).expect("finite coefficients"))
}

/// A uniformly shuffled partition of `0..n` into `m` nonempty blocks.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<Vec<usize>> {
    assert!(1 <= m && m <= n);
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, m - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut start = 0;
    cuts.into_iter()
        .map(|end| {
            let mut block = vars[start..end].to_vec();
            block.sort_unstable();
            start = end;
            block
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchInstance {
    pub f: SparsePolynomial,
    pub partition: Vec<Vec<usize>>,
}

impl BenchInstance {
    pub fn problem(&self, d: u32) -> Result<SemialgebraicProblem, BoundError> {
        partition_problem(&self.f, &vec![1.0; self.f.n()], &self.partition, d)
    }
}

fn check(cfg: &BenchConfig) -> Result<(), String> {
    if cfg.n == 0 || cfg.t == 0 {
        return Err("n and t must be positive".into());
    }
    if cfg.d < 2 || cfg.d % 2 != 0 {
        return Err(format!("d = {} must be even and at least 2", cfg.d));
    }
    if let Some(m) = cfg.m {
        if m == 0 || m > cfg.n {
            return Err(format!("m = {m} must lie in 1..={}", cfg.n));
        }
    }
    Ok(())
}

/// The `reps` instances of a configuration, in order.
pub fn generate_instances(cfg: &BenchConfig) -> Result<Vec<BenchInstance>, String> {
    check(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.reps)
        .map(|_| {
            let f = random_polynomial(&mut rng, cfg.n, cfg.d, cfg.t)?;
            let m = cfg.m.unwrap_or_else(|| rng.gen_range(1..=cfg.n));
            let partition = random_partition(&mut rng, cfg.n, m);
            Ok(BenchInstance { f, partition })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub m: usize,
    pub status: BoundStatus,
    pub value: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: u32,
    pub t: usize,
    pub reps: usize,
    pub mean_seconds: f64,
    pub stddev_seconds: f64,
    pub bounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    /// `None` when `reps = 0`.
    pub row: Option<BenchRow>,
    pub instances: Vec<InstanceOutcome>,
}

pub const CSV_HEADER: &str = "n,d,t,reps,mean_seconds,stddev_seconds,bounds";

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{}",
            self.n, self.d, self.t, self.reps, self.mean_seconds, self.stddev_seconds, self.bounds
        )
    }
}

/// Generates the instances and times each bound. Instances run on up to
/// `threads` threads; timings are per instance.
pub fn run_bench(cfg: &BenchConfig, threads: usize) -> Result<BenchReport, String> {
    let instances = generate_instances(cfg)?;
    let opts = BoundOptions {
        tol: cfg.tol,
        ..BoundOptions::default()
    };
    let run = |inst: &BenchInstance| -> Result<InstanceOutcome, String> {
        let problem = inst.problem(cfg.d).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let r = lower_bound_with(&problem, None, &opts).map_err(|e| e.to_string())?;
        Ok(InstanceOutcome {
            m: inst.partition.len(),
            status: r.status,
            value: r.value,
            seconds: start.elapsed().as_secs_f64(),
        })
    };
    let threads = threads.clamp(1, instances.len().max(1));
    let chunk = instances.len().div_ceil(threads).max(1);
    let outcomes: Vec<InstanceOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = instances
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(run).collect::<Result<Vec<_>, _>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?
    .into_iter()
    .flatten()
    .collect();

    let row = (!outcomes.is_empty()).then(|| {
        let k = outcomes.len() as f64;
        let mean = outcomes.iter().map(|o| o.seconds).sum::<f64>() / k;
        let var = outcomes
            .iter()
            .map(|o| (o.seconds - mean).powi(2))
            .sum::<f64>()
            / k;
        BenchRow {
            n: cfg.n,
            d: cfg.d,
            t: cfg.t,
            reps: outcomes.len(),
            mean_seconds: mean,
            stddev_seconds: var.sqrt(),
            bounds: outcomes
                .iter()
                .filter(|o| o.status == BoundStatus::Bound)
                .count(),
        }
    });
    Ok(BenchReport {
        row,
        instances: outcomes,
    })
}
