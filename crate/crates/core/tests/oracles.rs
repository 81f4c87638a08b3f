mod common;

use common::*;
use corrector_core::corrector::{discounted_bounds, solve_discounted, transfer_residual};
use corrector_core::oracles::separable_from_problem;
use corrector_core::{
    classify_regions, delta_c, mc_ergodic_cost, solve_1d_closed_form, solve_policy_iteration, CorrectorProblem, Error, Matrix,
    McOptions, SolverOptions,
};

#[test]
fn one_dimensional_solver_matches_closed_form() {
    for &(sigma, alpha, l01, l10) in &[(1.0, 1.0, 0.001, 0.001), (0.7, 1.3, 0.002, 0.0005), (1.5, 0.6, 0.004, 0.004)] {
        let p = CorrectorProblem::with_auto_radius(
            matrix(&[vec![sigma]]),
            matrix(&[vec![alpha]]),
            costs(&[vec![0.0, l01], vec![l10, 0.0]]),
            201,
        )
        .unwrap();
        let sol = solve_policy_iteration(&p, &SolverOptions::default()).unwrap();
        let oracle = solve_1d_closed_form(sigma, alpha, l01, l10).unwrap();
        assert!((sol.a_bar / oracle.a_bar - 1.0).abs() < 0.01, "{} vs {}", sol.a_bar, oracle.a_bar);
        let h = p.grid.h();
        let nt: Vec<f64> = sol.nt_nodes().iter().map(|&k| p.grid.coord(k, 0)).collect();
        assert!((nt.last().unwrap() - oracle.rho_plus).abs() <= 2.0 * h);
        assert!((nt[0] + oracle.rho_plus).abs() <= 2.0 * h);
        let scale = oracle.w(p.grid.radius());
        for k in 0..p.grid.len() {
            let x = p.grid.coord(k, 0);
            assert!((sol.w[k] - oracle.w(x)).abs() < 0.02 * scale, "w at {x}");
        }
    }
}

#[test]
fn oracle_slope_binds_outside_the_boundary() {
    let p = standard_1d(141);
    let oracle = solve_1d_closed_form(1.0, 1.0, 0.001, 0.001).unwrap();
    let w: Vec<f64> = (0..p.grid.len()).map(|k| oracle.w(p.grid.coord(k, 0))).collect();
    let h = p.grid.h();
    for k in 1..p.grid.len() {
        if p.grid.coord(k, 0) > oracle.rho_plus + 2.0 * h {
            assert!(transfer_residual(&w, k, 1, 0, &p).unwrap().abs() <= h);
        }
    }
}

#[test]
fn support_function_satisfies_gradient_constraints() {
    let p = two_asset(sigma_uncorrelated(), all_transfers(0.001), 21);
    let w: Vec<f64> = (0..p.grid.len()).map(|k| delta_c(&p.grid.coords(k), &p.lambda).unwrap()).collect();
    for k in 0..p.grid.len() {
        for pair in p.pairs() {
            if let Ok(r) = transfer_residual(&w, k, pair.from, pair.to, &p) {
                assert!(r <= 1e-12 + p.grid.h(), "node {k} pair {}->{}: {r}", pair.from, pair.to);
            }
        }
    }
}

#[test]
fn separable_square_matches_product_solution() {
    let p = two_asset(sigma_uncorrelated(), cash_only(0.001, 0.001), 81);
    let sol = solve_policy_iteration(&p, &SolverOptions::default()).unwrap();
    let exact = separable_from_problem(&p).unwrap();
    assert!((sol.a_bar / exact.a_bar - 1.0).abs() < 0.03);
    let map = classify_regions(&sol).unwrap();
    let half = exact.nt_half_widths();
    let lo: Vec<f64> = half.iter().map(|x| -x).collect();
    assert!(map.hausdorff_to_box(&lo, &half) <= 2.0 * p.grid.h());
    assert_eq!(map.nt_convexity_defect(), Some(0.0));
}

#[test]
fn separable_oracle_rejects_coupled_problems() {
    let p = two_asset(sigma_sym(0.25), cash_only(0.001, 0.001), 21);
    assert!(matches!(separable_from_problem(&p), Err(Error::InapplicableStructure(_))));
    let q = two_asset(sigma_uncorrelated(), all_transfers(0.001), 21);
    assert!(matches!(separable_from_problem(&q), Err(Error::InapplicableStructure(_))));
}

#[test]
fn discounted_solver_agrees_with_policy_iteration() {
    let p = standard_1d(141);
    let opts = SolverOptions::default();
    let sol = solve_policy_iteration(&p, &opts).unwrap();
    let disc = solve_discounted(&p, 1e-3, &opts).unwrap();
    assert!((disc.a_estimate / sol.a_bar - 1.0).abs() < 0.05);
    let centered = disc.centered(p.grid.center());
    let inner: Vec<usize> = (0..p.grid.len()).filter(|&k| p.grid.coord(k, 0).abs() <= p.grid.radius() / 2.0).collect();
    let norm = inner.iter().map(|&k| sol.w[k].abs()).fold(0.0, f64::max);
    let gap = inner.iter().map(|&k| (centered[k] - sol.w[k]).abs()).fold(0.0, f64::max);
    assert!(gap <= 0.05 * norm);
    let bounds = discounted_bounds(&p, &disc).unwrap();
    assert!(bounds.lower_violation <= 1e-12 && bounds.upper_violation <= 1e-12, "{bounds:?}");
}

#[test]
fn discounted_bounds_hold_in_two_dimensions() {
    let p = two_asset(sigma_sym(0.25), all_transfers(0.001), 41);
    let disc = solve_discounted(&p, 1e-2, &SolverOptions::default()).unwrap();
    let bounds = discounted_bounds(&p, &disc).unwrap();
    assert!(bounds.lower_violation <= 1e-12 && bounds.upper_violation <= 1e-12, "{bounds:?}");
}

#[test]
fn frozen_state_costs_its_running_cost() {
    let p = standard_1d(141);
    let sol = solve_policy_iteration(&p, &SolverOptions::default()).unwrap();
    let frozen = CorrectorProblem { alpha_bar: Matrix::zeros(1, 1), ..p.clone() };
    let opts = McOptions { horizon: 10.0, dt: 1e-3, seed: 3, paths: 2, start: Some(vec![0.05]) };
    let mc = mc_ergodic_cost(&sol, &frozen, &opts).unwrap();
    assert!((mc.estimate - 0.05f64 * 0.05 / 2.0).abs() < 1e-15);
    assert_eq!(mc.transfer, 0.0);
}

#[test]
fn monte_carlo_is_reproducible_and_consistent() {
    let p = standard_1d(141);
    let sol = solve_policy_iteration(&p, &SolverOptions::default()).unwrap();
    let short = McOptions { horizon: 2e3, ..Default::default() };
    let a = mc_ergodic_cost(&sol, &p, &short).unwrap();
    let again = mc_ergodic_cost(&sol, &p, &short).unwrap();
    assert_eq!(a.estimate, again.estimate);
    let b = mc_ergodic_cost(&sol, &p, &McOptions { seed: 7, ..short.clone() }).unwrap();
    let combined = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    assert!((a.estimate - b.estimate).abs() < 4.0 * combined);
    assert!((a.estimate / sol.a_bar - 1.0).abs() < 0.05);
}

#[test]
fn monte_carlo_needs_a_diffusing_origin() {
    let p = standard_1d(41);
    let mut sol = solve_policy_iteration(&p, &SolverOptions::default()).unwrap();
    let c = p.grid.center();
    sol.policy.actions[c] = corrector_core::Action::Transfer(0);
    assert!(matches!(mc_ergodic_cost(&sol, &p, &McOptions::default()), Err(Error::NoNTRegion)));
}
