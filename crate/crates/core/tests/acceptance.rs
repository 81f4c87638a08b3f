//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use corrector_core::corrector::{discounted_bounds, solve_discounted};
use corrector_core::invariants::{all_passed, check_solution};
use corrector_core::{
    classify_regions, expansion_value, mc_ergodic_cost, second_corrector_value, solve_1d_closed_form, solve_merton,
    solve_policy_iteration, CorrectorProblem, McOptions, RegionMap, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A_STANDARD: f64 = 0.0065522;
const RHO_STANDARD: f64 = 0.114471;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: &str, title: &str, f: impl FnOnce() -> Result<Outcome, String>) -> bool {
    let start = Instant::now();
    let result = f();
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("{} {id} {title} [{secs:.2}s]: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn solve(p: &CorrectorProblem<f64>) -> Result<corrector_core::CorrectorSolution<f64>, String> {
    solve_policy_iteration(p, &SolverOptions::default()).map_err(|e| e.to_string())
}

fn one_dim_oracle() -> Outcome {
    let start = Instant::now();
    let p = standard_1d(141);
    let sol = match solve(&p) {
        Ok(s) => s,
        Err(e) => return outcome(false, e),
    };
    let elapsed = start.elapsed();
    let h = p.grid.h();
    let nt: Vec<f64> = sol.nt_nodes().iter().map(|&k| p.grid.coord(k, 0)).collect();
    let (left, right) = (nt[0], *nt.last().unwrap());
    let a_ok = rel(sol.a_bar, A_STANDARD) <= 0.02;
    let b_ok = (right - RHO_STANDARD).abs() <= 2.0 * h && (left + RHO_STANDARD).abs() <= 2.0 * h;
    let t_ok = elapsed < Duration::from_secs(5);
    outcome(
        a_ok && b_ok && t_ok,
        format!(
            "a = {:.7} (rel err {:.2e}), NT = [{left:.5}, {right:.5}], 2h = {:.5}, solve {:.3}s",
            sol.a_bar,
            rel(sol.a_bar, A_STANDARD),
            2.0 * h,
            elapsed.as_secs_f64()
        ),
    )
}

fn separable_two_dim() -> Result<Outcome, String> {
    let start = Instant::now();
    let p = two_asset(sigma_uncorrelated(), cash_only(0.001, 0.001), 121);
    let sol = solve(&p)?;
    let elapsed = start.elapsed();
    let map = classify_regions(&sol).map_err(|e| e.to_string())?;
    let hd = map.hausdorff_to_box(&[-RHO_STANDARD; 2], &[RHO_STANDARD; 2]);
    let h = p.grid.h();
    let err = rel(sol.a_bar, 2.0 * A_STANDARD);
    Ok(outcome(
        err <= 0.03 && hd <= 2.0 * h && elapsed < Duration::from_secs(60),
        format!("a = {:.7} vs {:.7} (rel err {err:.2e}), Hausdorff {hd:.5} <= 2h = {:.5}", sol.a_bar, 2.0 * A_STANDARD, 2.0 * h),
    ))
}

fn vanishing_discount() -> Result<Outcome, String> {
    let p = standard_1d(141);
    let opts = SolverOptions::default();
    let sol = solve(&p)?;
    let disc = solve_discounted(&p, 1e-3, &opts).map_err(|e| e.to_string())?;
    let centered = disc.centered(p.grid.center());
    let inner: Vec<usize> = (0..p.grid.len()).filter(|&k| p.grid.coord(k, 0).abs() <= p.grid.radius() / 2.0).collect();
    let norm = inner.iter().map(|&k| sol.w[k].abs()).fold(0.0, f64::max);
    let gap = inner.iter().map(|&k| (centered[k] - sol.w[k]).abs()).fold(0.0, f64::max) / norm;
    let bounds = discounted_bounds(&p, &disc).map_err(|e| e.to_string())?;
    let err = rel(disc.a_estimate, sol.a_bar);
    let bounds_ok = bounds.lower_violation <= 0.0 && bounds.upper_violation <= 0.0;
    Ok(outcome(
        err <= 0.05 && gap <= 0.05 && bounds_ok,
        format!(
            "eta*min w = {:.7} vs a = {:.7} (rel err {err:.2e}), potential gap {gap:.2e}, K1 = {:.3e}, K2 = {:.3e}, violations {:.1e}/{:.1e}",
            disc.a_estimate, sol.a_bar, bounds.k1, bounds.k2, bounds.lower_violation, bounds.upper_violation
        ),
    ))
}

fn monte_carlo() -> Result<Outcome, String> {
    let p = standard_1d(141);
    let sol = solve(&p)?;
    let opts = McOptions { horizon: 2e4, dt: 1e-3, ..Default::default() };
    let start = Instant::now();
    let mc = mc_ergodic_cost(&sol, &p, &opts).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let allowance = 0.01 * (p.grid.h() + opts.dt.sqrt());
    let floor = sol.a_bar - (2.0 * mc.stderr + allowance);
    let err = rel(mc.estimate, sol.a_bar);
    Ok(outcome(
        err <= 0.05 && rel(mc.estimate, A_STANDARD) <= 0.05 && mc.estimate >= floor && elapsed < Duration::from_secs(30),
        format!(
            "estimate {:.7} +- {:.1e} vs a = {:.7} (rel err {err:.2e}), floor {floor:.7}, {:.2}s",
            mc.estimate,
            mc.stderr,
            sol.a_bar,
            elapsed.as_secs_f64()
        ),
    ))
}

struct Figure {
    map: RegionMap<f64>,
    h: f64,
}

fn figure(sigma: corrector_core::Matrix<f64>, lambda: corrector_core::CostMatrix<f64>) -> Result<Figure, String> {
    let p = two_asset(sigma, lambda, 201);
    let sol = solve(&p)?;
    let map = classify_regions(&sol).map_err(|e| e.to_string())?;
    Ok(Figure { map, h: p.grid.h() })
}

fn gallery() -> Result<Outcome, String> {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;

    let rect = figure(sigma_uncorrelated(), cash_only(0.001, 0.001))?;
    let bb = rect.map.nt_bounding_box();
    let lo: Vec<f64> = bb.iter().map(|b| b.0).collect();
    let hi: Vec<f64> = bb.iter().map(|b| b.1).collect();
    let rect_hd = rect.map.hausdorff_to_box(&lo, &hi);
    let rect_ok = rect_hd <= 2.0 * rect.h && rect.map.nt_convexity_defect() == Some(0.0) && rect.map.is_point_symmetric();
    ok &= rect_ok;
    notes.push(format!("rectangle {} (box distance {rect_hd:.4})", if rect_ok { "yes" } else { "no" }));

    let plus = figure(sigma_sym(0.25), cash_only(0.001, 0.001))?;
    let minus = figure(sigma_sym(-0.25), cash_only(0.001, 0.001))?;
    let (cp, cm) = (plus.map.nt_correlation().unwrap(), minus.map.nt_correlation().unwrap());
    let shear_ok = cp * cm < 0.0 && cp.abs() > 0.1 && cm.abs() > 0.1;
    ok &= shear_ok;
    notes.push(format!("shear {cp:+.3}/{cm:+.3}"));

    let skew_neg = figure(matrix(&[vec![1.0, -0.25], vec![-0.1, 1.0]]), cash_only(0.001, 0.001))?;
    let skew_pos = figure(matrix(&[vec![1.0, 0.25], vec![0.1, 1.0]]), cash_only(0.001, 0.001))?;
    let (sn, sp) = (skew_neg.map.nt_correlation().unwrap(), skew_pos.map.nt_correlation().unwrap());
    let skew_ok = sn * sp < 0.0;
    ok &= skew_ok;
    notes.push(format!("stronger correlation shear {sn:+.3}/{sp:+.3}"));

    let unequal = figure(sigma_uncorrelated(), cash_only(0.001, 0.002))?;
    let ext = unequal.map.nt_extents();
    let ratio = ext[0] / ext[1];
    let thin_ok = ratio < 0.95;
    ok &= thin_ok;
    notes.push(format!("cheaper-asset width ratio {ratio:.3}"));

    let all = figure(sigma_uncorrelated(), all_transfers(0.001))?;
    let blue = all.map.colors().iter().filter(|&&c| c == Some(corrector_core::regions::BLUE)).count();
    let defect = all.map.nt_convexity_defect().unwrap();
    let all_ok = blue > 0 && defect >= all.h;
    ok &= all_ok;
    notes.push(format!("all transfers: {blue} blue cells, convexity defect {:.2}h", defect / all.h));

    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    Ok(outcome(ok, notes.join("; ")))
}

fn invariant_matrix() -> Result<Outcome, String> {
    let mut failures = Vec::new();
    let instances = instance_matrix(141, 61);
    let count = instances.len();
    for (name, problem) in instances {
        let sol = solve(&problem).map_err(|e| format!("{name}: {e}"))?;
        let checks = check_solution(&problem, &sol, None);
        if !all_passed(&checks) {
            failures.extend(checks.iter().filter(|c| !c.passed()).map(|c| format!("{name}: {c}")));
        }
    }
    let base = standard_1d(141);
    let mut prev = f64::NEG_INFINITY;
    for factor in [0.5, 1.0, 2.0, 4.0] {
        let a = solve(&base.with_lambda(base.lambda.scaled(factor)))?.a_bar;
        if a < prev {
            failures.push(format!("lambda x{factor}: a decreased to {a}"));
        }
        prev = a;
    }
    Ok(outcome(failures.is_empty(), if failures.is_empty() { format!("{count} instances green, cost sweep monotone") } else { failures.join(" | ") }))
}

fn merton_checks() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let a_bar = solve_1d_closed_form(1.0, 1.0, 0.001, 0.001).map_err(|e| e.to_string())?.a_bar;
    let (mut hjb, mut op) = (0.0f64, 0.0f64);
    let mut exact = true;
    for params in [market_1d(), market_2d()] {
        let sol = solve_merton(&params).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let z: f64 = rng.gen_range(0.1..10.0);
            hjb = hjb.max(sol.hjb_residual(&params, z).abs() / (params.beta * sol.value(z)).abs());
        }
        let u0 = second_corrector_value(&sol, a_bar).map_err(|e| e.to_string())?;
        for z in [0.5, 1.0, 2.0] {
            let lhs = apply_second_corrector_operator(&sol, &params, u0, z);
            op = op.max(rel(lhs, sol.value_z(z) * sol.eta(z) * a_bar));
        }
        let sol = sol.with_corrector(a_bar).map_err(|e| e.to_string())?;
        exact &= [0.3, 1.0, 4.0].iter().all(|&z| expansion_value(&sol, z, 0.0) == sol.value(z));
    }
    Ok(outcome(
        hjb <= 1e-10 && op <= 1e-6 && exact,
        format!("HJB residual {hjb:.1e}, second corrector residual {op:.1e}, epsilon = 0 exact: {exact}"),
    ))
}

fn main() -> ExitCode {
    let results = [
        run("C1", "1D oracle agreement", || Ok(one_dim_oracle())),
        run("C2", "separable 2D square", separable_two_dim),
        run("C3", "vanishing-discount cross-check", vanishing_discount),
        run("C4", "Monte-Carlo validation", monte_carlo),
        run("C5", "figure gallery", gallery),
        run("C6", "invariant suite", invariant_matrix),
        run("C7", "Merton and second corrector", merton_checks),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} acceptance criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
