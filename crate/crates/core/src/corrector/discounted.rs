use rayon::prelude::*;

use crate::corrector::howard::{assemble_row, check_chains, improve_policy, initial_policy, make_solver, relative_row_residual, DiffuseTerm, Row};
use crate::corrector::stencil::Stencil;
use crate::corrector::{CorrectorProblem, PolicyField, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::oracles::delta_c;
use crate::scalar::Scalar;

/// Solution of the discounted problem `max{eta w - L w - f ; r} = 0`.
#[derive(Debug, Clone)]
pub struct DiscountedSolution<T> {
    pub eta: T,
    pub w: Vec<T>,
    /// `eta * min w`, the vanishing-discount estimate of the eigenvalue.
    pub a_estimate: T,
    pub policy: PolicyField,
    pub iterations: usize,
}

impl<T: Scalar> DiscountedSolution<T> {
    /// `w - w(center)`, comparable with the ergodic potential.
    pub fn centered(&self, center: usize) -> Vec<T> {
        let c = self.w[center];
        self.w.iter().map(|&x| x - c).collect()
    }
}

fn evaluate_discounted<T: Scalar>(policy: &PolicyField, problem: &CorrectorProblem<T>, eta: T, opts: &SolverOptions<T>) -> Result<Vec<T>> {
    check_chains(policy, problem)?;
    let n = problem.grid.len();
    let stencil = Stencil::new(problem);
    let pairs = problem.pairs();
    let rows: Vec<Row<T>> = (0..n)
        .into_par_iter()
        .map(|k| assemble_row(problem, &stencil, &pairs, policy.actions[k], k, Some(eta)))
        .collect::<Result<_>>()?;
    let mut a = CsrMatrix::new(n);
    let mut buf = Vec::new();
    for row in &rows {
        buf.extend_from_slice(&row.entries);
        a.push_row(&mut buf);
    }
    let f: Vec<T> = rows.iter().map(|r| r.rhs).collect();
    let w = make_solver(a, opts)?.solve(&f)?;
    let check = relative_row_residual(&rows, &w, T::zero());
    if !(check <= T::epsilon().sqrt()) {
        return Err(Error::LinearSolveFailure(format!("discounted evaluation residual {check:e}")));
    }
    Ok(w)
}

/// Policy iteration for the discounted equation; no eigenvalue unknown and
/// no normalization.
pub fn solve_discounted<T: Scalar>(problem: &CorrectorProblem<T>, eta: T, opts: &SolverOptions<T>) -> Result<DiscountedSolution<T>> {
    if !(eta > T::zero()) {
        return Err(Error::InvalidParams("discount must be positive".into()));
    }
    problem.validate()?;
    let tol_switch = opts.tol_switch(problem);
    let mut policy = initial_policy(problem);
    for iter in 1..=opts.max_iters {
        let w = evaluate_discounted(&policy, problem, eta, opts)?;
        let next = improve_policy(&w, problem, Some((&policy, DiffuseTerm::Discounted(eta))), tol_switch);
        if next == policy {
            let w_min = w.iter().copied().fold(T::infinity(), T::min);
            return Ok(DiscountedSolution { eta, a_estimate: eta * w_min, w, policy, iterations: iter });
        }
        policy = next;
    }
    Err(Error::MaxItersExceeded(opts.max_iters))
}

/// Constants of the two-sided estimate `(delta_C - K1)^+ <= w <= K2 / eta + delta_C`
/// evaluated on the grid, and the largest violation of either side.
#[derive(Debug, Clone, Copy)]
pub struct DiscountedBounds<T> {
    /// Smallest `K1` with `(delta_C - K1)^+ <= f` at every node.
    pub k1: T,
    /// Smallest `K2` making `K2 / eta + delta_C` a supersolution of the
    /// diffusion row at every interior node.
    pub k2: T,
    pub lower_violation: T,
    pub upper_violation: T,
}

pub fn discounted_bounds<T: Scalar>(problem: &CorrectorProblem<T>, sol: &DiscountedSolution<T>) -> Result<DiscountedBounds<T>> {
    let grid = &problem.grid;
    let delta: Vec<T> = (0..grid.len()).map(|k| delta_c(&grid.coords(k), &problem.lambda)).collect::<Result<_>>()?;
    let stencil = Stencil::new(problem);
    let cost: Vec<T> = (0..grid.len()).map(|k| problem.running_cost(&grid.coords(k))).collect();
    let k1 = (0..grid.len()).map(|k| delta[k] - cost[k]).fold(T::zero(), T::max);
    let k2 = (0..grid.len())
        .filter_map(|k| stencil.apply(grid, &delta, k).map(|g| cost[k] + g - sol.eta * delta[k]))
        .fold(T::zero(), T::max);
    let mut lower_violation = T::zero();
    let mut upper_violation = T::zero();
    for k in 0..grid.len() {
        lower_violation = lower_violation.max((delta[k] - k1).max(T::zero()) - sol.w[k]);
        upper_violation = upper_violation.max(sol.w[k] - (k2 / sol.eta + delta[k]));
    }
    Ok(DiscountedBounds { k1, k2, lower_violation, upper_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::market::CostMatrix;

    #[test]
    fn free_transfers_give_zero_potential() {
        let one = Matrix::<f64>::identity(1);
        let p = CorrectorProblem::new(one.clone(), one, CostMatrix::uniform(1, 0.0).unwrap(), 0.35, 41).unwrap();
        let sol = solve_discounted(&p, 1e-3, &SolverOptions::default()).unwrap();
        assert!(sol.w.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn nonpositive_discount_is_rejected() {
        let one = Matrix::identity(1);
        let p = CorrectorProblem::new(one.clone(), one, CostMatrix::uniform(1, 0.001).unwrap(), 0.35, 41).unwrap();
        assert!(matches!(solve_discounted(&p, 0.0, &SolverOptions::default()), Err(Error::InvalidParams(_))));
    }
}
