//! Config-to-artifacts pipeline: Merton step, corrector solve(s), region
//! classification, optional validation, and a deterministic summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use corrector_core::corrector::{DEFAULT_MARGIN, MIN_RADIUS};
use corrector_core::invariants::{all_passed, Status};
use corrector_core::market::effective_diffusion;
use corrector_core::oracles::separable_from_problem;
use corrector_core::{
    check_solution, classify_regions, default_radius, discounted_bounds, emit_csv, emit_image, label_regions,
    mc_ergodic_cost, second_corrector_value, solve_discounted, solve_merton, solve_policy_iteration, Backend,
    CorrectorProblem, CorrectorSolution, CostConvention, CostMatrix, Error, MarketParams, Matrix, McOptions,
    MertonSolution, RegionMap, SolverOptions,
};

use crate::config::{AlphaSource, BackendChoice, CostConventionChoice, ExperimentConfig, Mode, Radius};
use crate::error::CliError;

/// Files written by a run.
#[derive(Debug, Default)]
pub struct RunReport {
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub failed_checks: Vec<String>,
}

/// Key-value summary in insertion order.
struct Summary(String);

impl Summary {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key}={value}");
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn build_problem(
    config: &ExperimentConfig,
    summary: &mut Summary,
) -> Result<(CorrectorProblem<f64>, MertonSolution<f64>), CliError> {
    let m = &config.market;
    let sigma = Matrix::from_f64_rows(&m.sigma)?;
    let lambda = CostMatrix::from_f64_rows(&m.lambda)?;
    let params = MarketParams::new(m.mu.clone(), m.r, sigma.clone(), m.beta, m.p, lambda.clone(), m.epsilon)?;
    let merton = solve_merton(&params)?;
    summary.put("merton.pi", fmt_vec(&merton.pi));
    summary.put("merton.c0", merton.c0);
    summary.put("merton.kappa2", merton.kappa2);

    let alpha_bar = match m.alpha_source {
        AlphaSource::Merton => effective_diffusion(&merton, config.solver.diffusion_floor)?,
        AlphaSource::Sigma => sigma.clone(),
        AlphaSource::Explicit => Matrix::from_f64_rows(m.alpha_bar.as_ref().expect("validated"))?,
    };
    summary.put("alpha_bar", format!("{:?}", alpha_bar.to_rows()));

    let n = config.solver.n;
    let radius = match config.solver.radius {
        Radius::Fixed(r) => r,
        Radius::Named(_) => {
            let margin = if config.solver.margin > 0.0 { config.solver.margin } else { DEFAULT_MARGIN };
            default_radius(&sigma, &alpha_bar, &lambda, margin, MIN_RADIUS)
        }
    };
    let convention = match config.solver.cost_convention {
        CostConventionChoice::Sigma => CostConvention::Sigma,
        CostConventionChoice::SigmaTranspose => CostConvention::SigmaTranspose,
    };
    let problem = CorrectorProblem::new(sigma, alpha_bar, lambda, radius, n)?.with_cost_convention(convention);
    summary.put("grid.d", problem.d());
    summary.put("grid.n", n);
    summary.put("grid.radius", radius);
    summary.put("grid.h", problem.grid.h());
    Ok((problem, merton))
}

fn solver_options(config: &ExperimentConfig) -> SolverOptions<f64> {
    let s = &config.solver;
    SolverOptions {
        max_iters: s.max_iters,
        tol_switch: s.tol_switch,
        tol_a: s.tol_a,
        tol_bind: s.tol_bind,
        backend: match s.backend {
            BackendChoice::Auto => Backend::Auto,
            BackendChoice::Direct => Backend::Direct,
            BackendChoice::Krylov => Backend::Krylov,
        },
        check_domain: s.check_domain,
        ..SolverOptions::default()
    }
}

fn regions(sol: &CorrectorSolution<f64>, summary: &mut Summary) -> RegionMap<f64> {
    match classify_regions(sol) {
        Ok(map) => {
            summary.put("regions.nt_connected", true);
            map
        }
        Err(Error::EmptyNTRegion) => {
            summary.put("regions.nt_connected", false);
            label_regions(sol)
        }
        Err(e) => unreachable!("classification only fails on an empty region: {e}"),
    }
}

/// Closed-form comparison when the problem separates into one-asset problems.
fn oracle_comparison(problem: &CorrectorProblem<f64>, sol: &CorrectorSolution<f64>, summary: &mut Summary) {
    match separable_from_problem(problem) {
        Ok(exact) => {
            summary.put("oracle.a_bar", exact.a_bar);
            let rel = if exact.a_bar != 0.0 { (sol.a_bar / exact.a_bar - 1.0).abs() } else { sol.a_bar.abs() };
            summary.put("oracle.rel_err", rel);
            summary.put("oracle.nt_half_widths", fmt_vec(&exact.nt_half_widths()));
        }
        Err(e) => summary.put("oracle", format!("none ({e})")),
    }
}

fn write(path: PathBuf, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(&path, bytes)?;
    files.push(path);
    Ok(())
}

/// Runs one experiment and writes its artifacts into `out`.
pub fn run(config: &ExperimentConfig, out: &Path, check: bool) -> Result<RunReport, CliError> {
    let mut summary = Summary(String::new());
    if let Some(name) = &config.preset {
        summary.put("preset", name);
    }
    let (problem, merton) = build_problem(config, &mut summary)?;
    let opts = solver_options(config);
    let mut report = RunReport::default();
    fs::create_dir_all(out)?;

    let mut solution = None;
    if matches!(config.solver.mode, Mode::PolicyIteration | Mode::Both) {
        let sol = solve_policy_iteration(&problem, &opts)?;
        summary.put("a_bar", sol.a_bar);
        summary.put("iterations", sol.iterations);
        summary.put("residual", format!("{:e}", sol.residual_norm));
        summary.put("nt_nodes", sol.nt_nodes().len());
        summary.put("neumann_nodes", sol.neumann_nodes);
        summary.put("non_monotone", sol.non_monotone);
        solution = Some(sol);
    }

    if matches!(config.solver.mode, Mode::Discounted | Mode::Both) {
        let disc = solve_discounted(&problem, config.solver.eta, &opts)?;
        let bounds = discounted_bounds(&problem, &disc)?;
        summary.put("discounted.eta", disc.eta);
        summary.put("discounted.a_estimate", disc.a_estimate);
        summary.put("discounted.iterations", disc.iterations);
        summary.put("discounted.k1", bounds.k1);
        summary.put("discounted.k2", bounds.k2);
        summary.put("discounted.bounds_hold", bounds.lower_violation <= 0.0 && bounds.upper_violation <= 0.0);
    }

    if let Some(sol) = &solution {
        match second_corrector_value(&merton, sol.a_bar) {
            Ok(u0) => summary.put("u0", u0),
            Err(e) => summary.put("u0", format!("unavailable ({e})")),
        }
        oracle_comparison(&problem, sol, &mut summary);

        let map = regions(sol, &mut summary);
        if config.output.csv {
            emit_csv(&map, &out.join("regions.csv"))?;
            report.files.push(out.join("regions.csv"));
        }
        if config.output.image && problem.d() == 2 {
            emit_image(&map, &out.join("regions.ppm"), config.output.scale)?;
            report.files.push(out.join("regions.ppm"));
        }

        if config.validation.mc {
            let v = &config.validation;
            let mc_opts = McOptions { horizon: v.horizon, dt: v.dt, seed: v.seed, paths: v.paths, start: None };
            let mc = mc_ergodic_cost(sol, &problem, &mc_opts)?;
            summary.put("mc.estimate", mc.estimate);
            summary.put("mc.stderr", format!("{:e}", mc.stderr));
            summary.put("mc.escapes", mc.escapes);
        }

        if check || config.validation.check {
            let checks = check_solution(&problem, sol, None);
            for c in &checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                summary.put(&format!("check.{}", c.name), format!("{tag} {}", c.detail));
            }
            if !all_passed(&checks) {
                report.failed_checks = checks.iter().filter(|c| !c.passed()).map(|c| c.to_string()).collect();
            }
        }
    }

    write(out.join("summary.txt"), summary.0.as_bytes(), &mut report.files)?;
    report.summary = summary.0;
    if !report.failed_checks.is_empty() {
        return Err(CliError::Check(report.failed_checks.join("; ")));
    }
    Ok(report)
}
