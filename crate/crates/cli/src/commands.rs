//! Subcommand implementations. Each returns the process exit code.

use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use anyhow::{anyhow, Result};
use log::{info, warn};
use serde::Serialize;

use sip_interp::oracle::{self, OracleConfig};
use sip_interp::regulariser::{norm_monotonicity_probe, tangential_monotonicity_probe};
use sip_interp::solver::{representer_deviation, solve_regularised};
use sip_interp::space::axioms::{run_axiom_case, AxiomReport, AxiomSuiteConfig};
use sip_interp::space::orthogonal_decompose;
use sip_interp::{Error, ProbeReport, Regulariser, RegulariserSpec, SolverConfig, Space, SpaceConfig};

use crate::files::{
    parse_regulariser_arg, parse_space_arg, print_json, print_text, read_json, write_json, CheckVerdict,
    DecomposeFile, OracleCheck, ProblemFile, ReportFile, FORMAT,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_VIOLATION: u8 = 3;
pub const EXIT_COUNTEREXAMPLE: u8 = 4;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes to `output` when given, otherwise prints to stdout.
fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => write_json(path, value),
        None => print_json(value),
    }
}

pub struct SolveArgs {
    pub input: PathBuf,
    pub config: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub oracle_check: bool,
    pub oracle_tolerance: f64,
    pub seed: u64,
    pub omit_timing: bool,
}

pub fn solve(args: &SolveArgs) -> Result<u8> {
    let file: ProblemFile = read_json(&args.input)?;
    let (problem, reg) = file.build()?;
    let mut config: SolverConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => SolverConfig::default(),
    };
    config.probe_seed = args.seed;
    config.validate()?;
    info!(
        "solving {} constraints in dimension {} (p = {})",
        problem.len(),
        problem.space().dim(),
        problem.space().p()
    );

    let start = Instant::now();
    let solution = match solve_regularised(&problem, &reg, &config) {
        Ok(s) => s,
        Err(Error::Infeasible {
            residual,
            coefficient_norm,
        }) => {
            eprintln!("error: constraints infeasible");
            eprintln!("  max residual {residual:e}, coefficient norm {coefficient_norm:e}");
            for (i, r) in problem.best_fit_residuals().iter().enumerate() {
                eprintln!("  best-fit residual data[{i}]: {r:e}");
            }
            return Ok(EXIT_INFEASIBLE);
        }
        Err(Error::NotAdmissible) => {
            eprintln!(
                "error: regulariser {} failed the admissibility probes; the representer solution does not apply",
                reg.label()
            );
            return Ok(EXIT_COUNTEREXAMPLE);
        }
        Err(e) => return Err(e.into()),
    };
    let wall_time = start.elapsed().as_secs_f64();

    let oracle = if args.oracle_check {
        let cfg = OracleConfig {
            seed: args.seed,
            ..OracleConfig::default()
        };
        let direct = oracle::solve_constrained_direct(&problem, &reg, &cfg)?;
        let distance = (&direct - &solution.f).norm() / (1.0 + solution.f.norm());
        let pass = distance <= args.oracle_tolerance;
        if !pass {
            warn!("oracle disagrees with the representer solution: distance {distance:e}");
        }
        Some(OracleCheck {
            constraint_residual: problem.constraint_residual(&direct),
            f: direct.into_coords(),
            distance,
            tolerance: args.oracle_tolerance,
            verdict: CheckVerdict::from_pass(pass),
        })
    } else {
        None
    };

    let report = ReportFile {
        format: FORMAT,
        version: VERSION.to_string(),
        seed: args.seed,
        space: problem.space().config(),
        regulariser: file.regulariser_spec(),
        representer_deviation: representer_deviation(&solution.f, &solution.coefficients, &problem),
        f: solution.f.coords().to_vec(),
        coefficients: solution.coefficients,
        constraint_residual: solution.constraint_residual,
        peaking_gap: solution.peaking_gap,
        dual_objective: solution.dual_objective,
        objective_value: solution.objective_value,
        iterations: solution.iterations,
        converged: solution.converged,
        wall_time: (!args.omit_timing).then_some(wall_time),
        oracle,
    };
    report.validate()?;
    emit(&report, args.output.as_deref())?;
    Ok(EXIT_OK)
}

pub struct AxiomArgs {
    pub config: AxiomSuiteConfig,
    pub jobs: usize,
    pub output: Option<PathBuf>,
}

/// Runs the cases on up to `jobs` threads; the merge is in case order.
pub fn run_axioms_parallel(config: &AxiomSuiteConfig, jobs: usize) -> Result<AxiomReport> {
    config.validate()?;
    let cases = config.cases();
    let jobs = jobs.clamp(1, cases.len());
    let tol = config.tolerance;
    let mut slots: Vec<Option<AxiomReport>> = vec![None; cases.len()];
    thread::scope(|scope| -> Result<()> {
        let handles: Vec<_> = (0..jobs)
            .map(|k| {
                let cases = &cases;
                scope.spawn(move || {
                    (k..cases.len())
                        .step_by(jobs)
                        .map(|i| run_axiom_case(&cases[i], tol).map(|r| (i, r)))
                        .collect::<sip_interp::Result<Vec<_>>>()
                })
            })
            .collect();
        for h in handles {
            let parts = h.join().map_err(|_| anyhow!("axiom worker panicked"))??;
            for (i, r) in parts {
                slots[i] = Some(r);
            }
        }
        Ok(())
    })?;
    Ok(AxiomReport::merge(tol, slots.into_iter().flatten()))
}

pub fn verify_axioms(args: &AxiomArgs) -> Result<u8> {
    let report = run_axioms_parallel(&args.config, args.jobs)?;
    let passed = report.passed();
    match args.output.as_deref() {
        Some(path) => write_json(path, &report)?,
        None => {
            let mut table = format!("{:<18} max_violation\n", "axiom");
            for r in &report.results {
                let mark = if r.max_violation <= report.tolerance { "ok" } else { "VIOLATED" };
                table += &format!("{:<18} {:.3e}  {mark}\n", r.axiom, r.max_violation);
            }
            table += &format!(
                "{} samples, tolerance {:e}: {}",
                report.samples,
                report.tolerance,
                if passed { "pass" } else { "fail" }
            );
            print_text(&table)?;
            if !passed {
                let offending: Vec<_> = report
                    .results
                    .iter()
                    .filter(|r| r.max_violation > report.tolerance)
                    .collect();
                print_json(&offending)?;
            }
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_VIOLATION })
}

pub struct ProbeArgs {
    pub regulariser: String,
    pub space: String,
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct ProbeOutput {
    format: u32,
    regulariser: RegulariserSpec,
    space: SpaceConfig,
    verdict: CheckVerdict,
    reports: Vec<ProbeReport>,
}

fn probe_both(reg: &Regulariser, space: &Space, samples: usize, seed: u64) -> Result<Vec<ProbeReport>> {
    Ok(vec![
        tangential_monotonicity_probe(reg, space, samples, seed)?,
        norm_monotonicity_probe(reg, space, samples, seed)?,
    ])
}

fn probe_verdict(reports: &[ProbeReport]) -> CheckVerdict {
    if reports.iter().all(ProbeReport::passed) {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Counterexample
    }
}

pub fn probe_regulariser(args: &ProbeArgs) -> Result<u8> {
    let spec = parse_regulariser_arg(&args.regulariser)?;
    let reg = Regulariser::from_spec(&spec)?;
    let space = parse_space_arg(&args.space)?;
    if args.samples == 0 {
        return Err(anyhow!("samples must be positive"));
    }
    let reports = probe_both(&reg, &space, args.samples, args.seed)?;
    let verdict = probe_verdict(&reports);
    let code = if verdict == CheckVerdict::Pass { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    let out = ProbeOutput {
        format: FORMAT,
        regulariser: spec,
        space: space.config(),
        verdict,
        reports,
    };
    emit(&out, args.output.as_deref())?;
    Ok(code)
}

pub struct CompareArgs {
    pub input: PathBuf,
    pub regs: Vec<String>,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct RejectedRegulariser {
    regulariser: RegulariserSpec,
    reports: Vec<ProbeReport>,
}

#[derive(Serialize)]
struct CompareOutput {
    format: u32,
    regularisers: Vec<RegulariserSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    rejected: Vec<RejectedRegulariser>,
    solutions: Vec<Vec<f64>>,
    /// `‖f_i - f_j‖ / (1 + max(‖f_i‖, ‖f_j‖))`.
    distances: Vec<Vec<f64>>,
    max_distance: f64,
    tolerance: f64,
    verdict: CheckVerdict,
}

pub fn compare_regularisers(args: &CompareArgs) -> Result<u8> {
    if !(args.tolerance.is_finite() && args.tolerance > 0.0) {
        return Err(anyhow!("tolerance must be positive"));
    }
    if args.samples == 0 {
        return Err(anyhow!("samples must be positive"));
    }
    let file: ProblemFile = read_json(&args.input)?;
    let (problem, _) = file.build()?;
    let specs = if args.regs.is_empty() {
        vec![file.regulariser_spec()]
    } else {
        args.regs
            .iter()
            .map(|r| parse_regulariser_arg(r))
            .collect::<Result<Vec<_>>>()?
    };
    let regs = specs
        .iter()
        .map(Regulariser::from_spec)
        .collect::<sip_interp::Result<Vec<_>>>()?;

    let mut rejected = Vec::new();
    for (spec, reg) in specs.iter().zip(&regs) {
        let reports = probe_both(reg, problem.space(), args.samples, args.seed)?;
        if probe_verdict(&reports) != CheckVerdict::Pass {
            eprintln!("regulariser {} failed the admissibility probes", reg.label());
            rejected.push(RejectedRegulariser {
                regulariser: spec.clone(),
                reports,
            });
        }
    }
    if !rejected.is_empty() {
        let out = CompareOutput {
            format: FORMAT,
            regularisers: specs,
            rejected,
            solutions: vec![],
            distances: vec![],
            max_distance: 0.0,
            tolerance: args.tolerance,
            verdict: CheckVerdict::Counterexample,
        };
        emit(&out, args.output.as_deref())?;
        return Ok(EXIT_COUNTEREXAMPLE);
    }

    let cfg = OracleConfig {
        seed: args.seed,
        ..OracleConfig::default()
    };
    let mut solutions = Vec::with_capacity(regs.len());
    for reg in &regs {
        info!("oracle solve under {}", reg.label());
        solutions.push(oracle::solve_constrained_direct(&problem, reg, &cfg)?);
    }
    let n = solutions.len();
    let mut distances = vec![vec![0.0; n]; n];
    let mut max_distance = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            let scale = 1.0 + solutions[i].norm().max(solutions[j].norm());
            let d = (&solutions[i] - &solutions[j]).norm() / scale;
            distances[i][j] = d;
            distances[j][i] = d;
            max_distance = max_distance.max(d);
        }
    }
    let pass = max_distance <= args.tolerance;
    let out = CompareOutput {
        format: FORMAT,
        regularisers: specs,
        rejected,
        solutions: solutions.into_iter().map(|f| f.into_coords()).collect(),
        distances,
        max_distance,
        tolerance: args.tolerance,
        verdict: CheckVerdict::from_pass(pass),
    };
    emit(&out, args.output.as_deref())?;
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATION })
}

pub struct DecomposeArgs {
    pub input: PathBuf,
    pub tolerance: f64,
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct DecomposeOutput {
    format: u32,
    x0: Vec<f64>,
    x_perp: Vec<f64>,
    coefficients: Vec<f64>,
    /// `[u, x_perp]` for each basis vector `u`.
    sip_values: Vec<f64>,
    max_abs_sip: f64,
    tolerance: f64,
    verdict: CheckVerdict,
}

pub fn decompose(args: &DecomposeArgs) -> Result<u8> {
    if !(args.tolerance.is_finite() && args.tolerance > 0.0) {
        return Err(anyhow!("tolerance must be positive"));
    }
    let file: DecomposeFile = read_json(&args.input)?;
    let (x, basis) = file.build()?;
    let d = orthogonal_decompose(&x, &basis)?;
    let sip_values: Vec<f64> = basis.iter().map(|u| u.sip(&d.x_perp)).collect();
    // relative to ‖u‖ and the size of x, so the check is scale-free
    let pass = basis
        .iter()
        .zip(&sip_values)
        .all(|(u, v)| v.abs() <= args.tolerance * u.norm() * x.norm().max(1.0));
    let out = DecomposeOutput {
        format: FORMAT,
        max_abs_sip: sip_values.iter().fold(0.0, |m, v| m.max(v.abs())),
        x0: d.x0.into_coords(),
        x_perp: d.x_perp.into_coords(),
        coefficients: d.coefficients,
        sip_values,
        tolerance: args.tolerance,
        verdict: CheckVerdict::from_pass(pass),
    };
    emit(&out, args.output.as_deref())?;
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATION })
}
