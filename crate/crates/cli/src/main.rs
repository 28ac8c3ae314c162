//! `gpbound`: lower bounds for polynomials on semialgebraic sets.
//!
//! Exit codes: 0 bound found (or verify passed), 1 other failure (including a
//! failed verify), 2 usage error, 3 bound is −∞, 4 no applicable geometric
//! program, 5 infeasible relaxation, 6 unreadable problem file.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gpbound::bench::{run_bench, BenchConfig, CSV_HEADER};
use gpbound::bounds::{lower_bound_with, BoundOptions, BoundResult, BoundStatus, PathChoice};
use gpbound::hypercube::{compare_with_gp, trivial_bound};
use gpbound::io::{parse_problem, ProblemSpec};
use gpbound::verify::{verify_bound, VerifyOptions};

const EXIT_FAILURE: u8 = 1;
const EXIT_NEG_INFINITY: u8 = 3;
const EXIT_NOT_A_GP: u8 = 4;
const EXIT_INFEASIBLE: u8 = 5;
const EXIT_PARSE: u8 = 6;

#[derive(Parser)]
#[command(
    name = "gpbound",
    version,
    about = "Lower bounds for polynomials via geometric programming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a lower bound for f on K_g.
    Bound {
        /// Problem file (JSON), or `-` for stdin.
        file: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        json: bool,
    },
    /// Trivial bound on the box ∏[−N_i, N_i], optionally compared with the GP bound.
    Trivial {
        file: PathBuf,
        /// Half-widths N_1,…,N_n; defaults to the file's `box`.
        #[arg(long = "box", value_delimiter = ',')]
        sample_box: Option<Vec<f64>>,
        /// Also compute the GP bound on the same box.
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        json: bool,
    },
    /// Compute the bound, then check it against random points of K_g.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Sampling box half-widths; defaults to the file's `box`.
        #[arg(long = "box", value_delimiter = ',')]
        sample_box: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Time random partition problems.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        t: usize,
        /// Number of blocks; random per instance if omitted.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8, value_parser = parse_tol)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// auto, canonical, m1, m2, identity or subset; overrides the file.
    #[arg(long)]
    path: Option<PathChoice>,
    #[arg(long, default_value_t = 1e-8, value_parser = parse_tol)]
    tol: f64,
    /// Keep the generators' square terms instead of truncating them.
    #[arg(long)]
    no_normalize: bool,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1e-2 {
        Ok(v)
    } else {
        Err(format!("tolerance must lie in (0, 1e-2], got {v}"))
    }
}

/// A failure with a specific exit code.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_FAILURE, e.into())
    }
}

fn load(file: &Path) -> Result<ProblemSpec, Failure> {
    let text = if file == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")
            .map_err(|e| Failure(EXIT_PARSE, e))?;
        s
    } else {
        std::fs::read_to_string(file)
            .with_context(|| format!("reading {}", file.display()))
            .map_err(|e| Failure(EXIT_PARSE, e))?
    };
    parse_problem(&text)
        .with_context(|| format!("parsing {}", file.display()))
        .map_err(|e| Failure(EXIT_PARSE, e))
}

/// Six significant digits, trailing zeros dropped.
fn sig6(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=6).contains(&exp) {
        return format!("{x:.5e}");
    }
    let s = format!("{:.*}", (5 - exp).max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&v| sig6(v)).collect();
    format!("[{}]", items.join(", "))
}

fn status_name(s: BoundStatus) -> &'static str {
    match s {
        BoundStatus::Bound => "bound",
        BoundStatus::NegInfinity => "-infinity",
        BoundStatus::NotAGeometricProgram => "not a geometric program",
        BoundStatus::Infeasible => "infeasible",
    }
}

fn exit_for(status: BoundStatus) -> u8 {
    match status {
        BoundStatus::Bound => 0,
        BoundStatus::NegInfinity => EXIT_NEG_INFINITY,
        BoundStatus::NotAGeometricProgram => EXIT_NOT_A_GP,
        BoundStatus::Infeasible => EXIT_INFEASIBLE,
    }
}

fn print_result(r: &BoundResult) {
    println!("status: {}", status_name(r.status));
    if let Some(v) = r.value {
        println!("value: {}", sig6(v));
    }
    if let Some(p) = r.theorem_path {
        let name = serde_json::to_value(p).ok();
        println!(
            "path: {}",
            name.as_ref().and_then(|v| v.as_str()).unwrap_or("?")
        );
    }
    if let Some(s) = &r.generator_subset {
        println!("generators used: {s:?}");
    }
    if let Some(a) = &r.matrix {
        let rows: Vec<String> = a.rows().iter().map(|row| list(row)).collect();
        println!("matrix: [{}]", rows.join(", "));
    }
    if let Some(w) = &r.witness {
        if !w.lambda.is_empty() {
            println!("lambda: {}", list(&w.lambda));
        }
    }
    for d in &r.diagnostics {
        println!("note: {d}");
    }
}

fn solve(spec: &ProblemSpec, args: &SolveArgs) -> Result<BoundResult> {
    let opts = BoundOptions {
        tol: args.tol,
        path: args.path.or(spec.path).unwrap_or_default(),
        normalize: !args.no_normalize,
    };
    Ok(lower_bound_with(&spec.problem, None, &opts)?)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Bound {
            file,
            solve: args,
            json,
        } => {
            let spec = load(&file)?;
            let r = solve(&spec, &args)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print_result(&r);
            }
            Ok(exit_for(r.status))
        }
        Command::Trivial {
            file,
            sample_box,
            compare,
            json,
        } => {
            let spec = load(&file)?;
            let scale = sample_box
                .or(spec.problem.sample_box.clone())
                .context("no box: pass --box N1,...,Nn or add \"box\" to the file")?;
            let report = trivial_bound(&spec.problem.f, &scale)?;
            let comparison = if compare {
                Some(compare_with_gp(&spec.problem.f, &scale, spec.problem.d)?)
            } else {
                None
            };
            if json {
                let out = serde_json::json!({ "trivial": report, "comparison": comparison });
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                println!("f_tr: {}", sig6(report.f_tr));
                for t in &report.per_term {
                    println!("  term {}: {}", t.alpha, sig6(t.contribution));
                }
                if let Some(c) = &comparison {
                    match c.gp_bound {
                        Some(b) => println!("gp bound: {}", sig6(b)),
                        None => println!("gp bound: {}", status_name(c.gp_status)),
                    }
                    println!("gp >= f_tr: {}", c.dominance_holds);
                    if let Some(eq) = c.equality_holds {
                        println!("gp = f_tr (all top coefficients <= 0): {eq}");
                    }
                }
            }
            let ok =
                comparison.is_none_or(|c| c.dominance_holds && c.equality_holds != Some(false));
            Ok(if ok { 0 } else { EXIT_FAILURE })
        }
        Command::Verify {
            file,
            solve: args,
            samples,
            sample_box,
            seed,
            json,
        } => {
            let spec = load(&file)?;
            let r = solve(&spec, &args)?;
            let Some(bound) = r.value.filter(|_| r.status == BoundStatus::Bound) else {
                if json {
                    println!("{}", serde_json::to_string_pretty(&r)?);
                } else {
                    print_result(&r);
                }
                return Ok(exit_for(r.status));
            };
            let opts = VerifyOptions {
                samples,
                seed,
                sample_box,
                ..VerifyOptions::default()
            };
            let report = verify_bound(&spec.problem, bound, &opts)?;
            if json {
                let out = serde_json::json!({ "result": r, "verify": report });
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                println!("bound: {}", sig6(bound));
                println!(
                    "accepted samples: {} of {} draws",
                    report.accepted, report.attempts
                );
                if let (Some(min), Some(margin)) = (report.min_value, report.margin) {
                    println!("min sampled f: {}", sig6(min));
                    println!("margin: {}", sig6(margin));
                }
                println!("violations: {}", report.violations);
                println!("{}", if report.passed { "PASS" } else { "FAIL" });
            }
            Ok(if report.passed { 0 } else { EXIT_FAILURE })
        }
        Command::Bench {
            n,
            d,
            t,
            m,
            reps,
            seed,
            tol,
            threads,
            json,
        } => {
            let cfg = BenchConfig {
                n,
                d,
                t,
                m,
                reps,
                seed,
                tol,
            };
            let report = run_bench(&cfg, threads).map_err(anyhow::Error::msg)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("{CSV_HEADER}");
                if let Some(row) = &report.row {
                    println!("{}", row.csv());
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GPBOUND_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
