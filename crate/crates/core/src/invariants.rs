//! Structural checks on a converged corrector solution.

use std::fmt;

use crate::corrector::{transfer_residual, CorrectorProblem, CorrectorSolution};
use crate::grid::{axis_step, Offset};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl InvariantCheck {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        Self { name, status: if ok { Status::Pass } else { Status::Fail }, detail }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Self { name, status: Status::Skipped, detail: why.to_string() }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl fmt::Display for InvariantCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Directions used for discrete convexity: the axes and all transfer steps.
fn convexity_directions<T: Scalar>(problem: &CorrectorProblem<T>) -> Vec<Offset> {
    let mut dirs: Vec<Offset> = (0..problem.d()).map(axis_step).collect();
    for p in problem.pairs() {
        let neg = crate::grid::negate(&p.step);
        if !dirs.contains(&p.step) && !dirs.contains(&neg) {
            dirs.push(p.step);
        }
    }
    dirs
}

/// Runs every applicable check. `tol` scales the absolute thresholds; pass
/// `None` for the solver's switching tolerance.
pub fn check_solution<T: Scalar>(problem: &CorrectorProblem<T>, sol: &CorrectorSolution<T>, tol: Option<T>) -> Vec<InvariantCheck> {
    let tol = tol.unwrap_or(sol.tol_switch);
    let grid = &sol.grid;
    let w = &sol.w;
    let h = grid.h();
    let center = grid.center();
    let w_scale = w.iter().fold(T::zero(), |m, &x| m.max(x.abs())).max(T::epsilon());
    let mut out = Vec::new();

    let tol_a = T::lit(1e-9) * T::one().max(sol.a_bar.abs());
    let worst_rise = sol.a_history.windows(2).map(|p| p[1] - p[0]).fold(T::neg_infinity(), T::max);
    out.push(InvariantCheck::new(
        "howard-monotone",
        sol.a_history.len() < 2 || worst_rise <= tol_a,
        format!("largest increase {:e} over {} evaluations", worst_rise.max(T::zero()), sol.a_history.len()),
    ));

    out.push(InvariantCheck::new("normalization", w[center] == T::zero(), format!("w(0) = {:e}", w[center])));

    if problem.lambda.is_symmetric() {
        let min_w = w.iter().copied().fold(T::infinity(), T::min);
        out.push(InvariantCheck::new("nonnegative", min_w >= -tol * h, format!("min w = {:e}", min_w)));
    } else {
        out.push(InvariantCheck::skipped("nonnegative", "asymmetric costs"));
    }

    let conv_tol = tol * h * T::lit(10.0);
    let mut worst_conv = T::zero();
    for dir in convexity_directions(problem) {
        let back = crate::grid::negate(&dir);
        for k in 0..w.len() {
            if let (Some(a), Some(b)) = (grid.shift(k, &dir), grid.shift(k, &back)) {
                worst_conv = worst_conv.min(w[a] - T::two() * w[k] + w[b]);
            }
        }
    }
    out.push(InvariantCheck::new("convexity", worst_conv >= -conv_tol, format!("min second difference {:e}", worst_conv)));

    let mut worst_grad = T::neg_infinity();
    for k in 0..w.len() {
        for p in problem.pairs() {
            if let Ok(r) = transfer_residual(w, k, p.from, p.to, problem) {
                if r.is_finite() {
                    worst_grad = worst_grad.max(r);
                }
            }
        }
    }
    out.push(InvariantCheck::new("gradient-in-cost-set", worst_grad <= tol * T::lit(10.0), format!("max constraint residual {:e}", worst_grad)));

    out.push(InvariantCheck::new(
        "residual",
        sol.residual_norm <= T::lit(10.0) * tol,
        format!("{:e} vs {:e}", sol.residual_norm, T::lit(10.0) * tol),
    ));

    let a = problem.diffusion();
    let d = problem.d();
    let min_axis = (0..d)
        .map(|i| a[(i, i)] - (0..d).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<T>())
        .fold(T::infinity(), T::min);
    if min_axis > T::zero() {
        let m = T::two() * sol.a_bar.max(T::zero()) / min_axis;
        let bound = T::two() * m * h * h + conv_tol;
        let mut worst = T::zero();
        for axis in 0..d {
            let s = axis_step(axis);
            let back = crate::grid::negate(&s);
            for k in 0..w.len() {
                if let (Some(a1), Some(b1)) = (grid.shift(k, &s), grid.shift(k, &back)) {
                    worst = worst.max(w[a1] - T::two() * w[k] + w[b1]);
                }
            }
        }
        out.push(InvariantCheck::new("second-difference-bound", worst <= bound, format!("{:e} vs {:e}", worst, bound)));
    } else {
        out.push(InvariantCheck::skipped("second-difference-bound", "stencil not diagonally dominant"));
    }

    if problem.lambda.is_symmetric() {
        let worst = (0..w.len()).map(|k| (w[k] - w[grid.mirror(k)]).abs()).fold(T::zero(), T::max);
        out.push(InvariantCheck::new(
            "point-symmetry",
            worst <= T::lit(1e-6) * w_scale + tol,
            format!("max |w(rho) - w(-rho)| = {:e}", worst),
        ));
    } else {
        out.push(InvariantCheck::skipped("point-symmetry", "asymmetric costs"));
    }

    out
}

pub fn all_passed(checks: &[InvariantCheck]) -> bool {
    checks.iter().all(InvariantCheck::passed)
}
