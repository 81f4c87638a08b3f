//! Finite-difference policy iteration for the normalized first corrector
//! equation
//!
//! ```text
//! max_{i,j} max{ a - 1/2 Tr(A D^2 w) - |sigma rho|^2 / 2 ;  D_i w - D_j w - lambda[i][j] } = 0,
//! ```
//!
//! with `A = alpha_bar alpha_bar^T`, `D_0 = 0` and `w(0) = 0`, plus a
//! vanishing-discount variant used as an independent route to `(w, a)`.

mod discounted;
mod howard;
mod stencil;

pub use discounted::{discounted_bounds, solve_discounted, DiscountedBounds, DiscountedSolution};
pub use howard::{evaluate_policy, improve_policy, initial_policy, solve_policy_iteration, DiffuseTerm};
pub use stencil::{apply_generator, transfer_residual};

use crate::error::{Error, Result};
use crate::grid::{transfer_direction, Grid, Offset};
use crate::linalg::Matrix;
use crate::market::{check_nondegenerate, CostMatrix};
use crate::oracles::delta_c;
use crate::scalar::Scalar;

/// Which matrix enters the running cost `|M rho|^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostConvention {
    /// `|sigma rho|^2 / 2`.
    #[default]
    Sigma,
    /// `|sigma^T rho|^2 / 2`.
    SigmaTranspose,
}

/// Linear solver used by policy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Direct banded factorization up to `direct_limit` unknowns, Krylov beyond.
    #[default]
    Auto,
    Direct,
    Krylov,
}

/// An admissible transfer from account `from` to account `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPair<T> {
    pub from: usize,
    pub to: usize,
    pub lambda: T,
    /// `e_to - e_from` in index units.
    pub step: Offset,
}

/// Frozen-coefficient eigenvalue problem on a truncated grid.
#[derive(Debug, Clone)]
pub struct CorrectorProblem<T> {
    pub grid: Grid<T>,
    pub sigma: Matrix<T>,
    pub alpha_bar: Matrix<T>,
    pub lambda: CostMatrix<T>,
    pub cost_convention: CostConvention,
}

/// Default lower bound on the smallest eigenvalue of `alpha_bar alpha_bar^T`.
pub const DIFFUSION_FLOOR: f64 = 1e-12;

impl<T: Scalar> CorrectorProblem<T> {
    /// Validated construction with an explicit radius.
    pub fn new(sigma: Matrix<T>, alpha_bar: Matrix<T>, lambda: CostMatrix<T>, radius: T, n: usize) -> Result<Self> {
        let d = sigma.rows();
        let problem = Self { grid: Grid::new(d, n, radius)?, sigma, alpha_bar, lambda, cost_convention: CostConvention::Sigma };
        problem.validate()?;
        Ok(problem)
    }

    /// Validated construction with the radius from [`default_radius`].
    pub fn with_auto_radius(sigma: Matrix<T>, alpha_bar: Matrix<T>, lambda: CostMatrix<T>, n: usize) -> Result<Self> {
        let radius = default_radius(&sigma, &alpha_bar, &lambda, T::lit(DEFAULT_MARGIN), T::lit(MIN_RADIUS));
        Self::new(sigma, alpha_bar, lambda, radius, n)
    }

    pub fn with_cost_convention(mut self, convention: CostConvention) -> Self {
        self.cost_convention = convention;
        self
    }

    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.grid.d();
        if self.sigma.rows() != d || self.sigma.cols() != d || self.alpha_bar.rows() != d || self.alpha_bar.cols() != d {
            return Err(Error::InvalidParams(format!("sigma and alpha_bar must be {d}x{d}")));
        }
        if self.lambda.size() != d + 1 {
            return Err(Error::InvalidParams(format!("lambda must be {}x{}", d + 1, d + 1)));
        }
        check_nondegenerate(&self.alpha_bar, T::lit(DIFFUSION_FLOOR))?;
        for k in 0..d {
            for sign in [T::one(), -T::one()] {
                let mut e = vec![T::zero(); d];
                e[k] = sign;
                delta_c(&e, &self.lambda)?;
            }
        }
        Ok(())
    }

    /// `alpha_bar alpha_bar^T`.
    pub fn diffusion(&self) -> Matrix<T> {
        self.alpha_bar.gram()
    }

    /// Running cost at a point.
    pub fn running_cost(&self, rho: &[T]) -> T {
        let m = match self.cost_convention {
            CostConvention::Sigma => self.sigma.mul_vec(rho),
            CostConvention::SigmaTranspose => self.sigma.transpose().mul_vec(rho),
        };
        m.iter().map(|&x| x * x).sum::<T>() / T::two()
    }

    /// Finite transfers in lexicographic `(from, to)` order.
    pub fn pairs(&self) -> Vec<TransferPair<T>> {
        self.lambda
            .finite_pairs()
            .into_iter()
            .map(|(from, to, lambda)| TransferPair { from, to, lambda, step: transfer_direction(from, to) })
            .collect()
    }

    /// Same problem with a different cost matrix.
    pub fn with_lambda(&self, lambda: CostMatrix<T>) -> Self {
        Self { lambda, ..self.clone() }
    }
}

pub const DEFAULT_MARGIN: f64 = 3.0;
pub const MIN_RADIUS: f64 = 1e-3;

/// Domain half-width from the separable upper-bound problem: the 1D
/// boundary for `sigma^2 -> lambda_max(sigma sigma^T)`,
/// `alpha^2 -> lambda_max(alpha alpha^T)` and total cost `4 lambda_bar`,
/// times `margin`, never below `min_radius`.
pub fn default_radius<T: Scalar>(sigma: &Matrix<T>, alpha_bar: &Matrix<T>, lambda: &CostMatrix<T>, margin: T, min_radius: T) -> T {
    let c1 = *sigma.gram().symmetric_eigenvalues().last().expect("non-empty");
    let c2 = *alpha_bar.gram().symmetric_eigenvalues().last().expect("non-empty");
    let lambda_bar = lambda.max_finite();
    if !(c1 > T::zero()) {
        return min_radius;
    }
    let rho_hat = (T::lit(3.0) * c2 * T::lit(4.0) * lambda_bar / (T::lit(4.0) * c1)).cbrt();
    (margin * rho_hat).max(min_radius)
}

/// Per-node control of a stationary policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Diffuse,
    /// Index into [`CorrectorProblem::pairs`].
    Transfer(usize),
    /// Boundary node without an admissible inward transfer: zero-flux link
    /// to the given neighbor.
    Neumann(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyField {
    pub actions: Vec<Action>,
}

impl PolicyField {
    pub fn diffuse_count(&self) -> usize {
        self.actions.iter().filter(|a| matches!(a, Action::Diffuse)).count()
    }
}

/// Tolerances and limits for the policy iteration.
#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub max_iters: usize,
    /// Switching threshold; `None` uses `max(1e-10, 1000 eps lambda_max)`.
    pub tol_switch: Option<T>,
    /// Eigenvalue stopping threshold; `None` uses `1e-9 max(1, |a|)`.
    pub tol_a: Option<T>,
    /// Binding threshold; `None` uses `max(10 tol_switch, 1e-3 h lambda_max)`.
    pub tol_bind: Option<T>,
    pub backend: Backend,
    pub direct_limit: usize,
    pub krylov_rel_tol: T,
    pub krylov_max_iters: usize,
    /// Raise `DomainTooSmall` when the boundary band is not fully binding.
    pub check_domain: bool,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol_switch: None,
            tol_a: None,
            tol_bind: None,
            backend: Backend::Auto,
            direct_limit: 200_000,
            krylov_rel_tol: T::lit(1e-13).max(T::epsilon() * T::lit(10.0)),
            krylov_max_iters: 5_000,
            check_domain: true,
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn tol_switch(&self, problem: &CorrectorProblem<T>) -> T {
        self.tol_switch
            .unwrap_or_else(|| T::lit(1e-10).max(T::lit(1000.0) * T::epsilon() * problem.lambda.max_finite()))
    }

    pub fn tol_a(&self, a_bar: T) -> T {
        self.tol_a
            .unwrap_or_else(|| (T::lit(1e-9) * T::one().max(a_bar.abs())).max(T::lit(100.0) * T::epsilon() * a_bar.abs()))
    }

    pub fn tol_bind(&self, problem: &CorrectorProblem<T>) -> T {
        self.tol_bind.unwrap_or_else(|| {
            (T::lit(10.0) * self.tol_switch(problem)).max(problem.grid.h() * problem.lambda.max_finite() * T::lit(1e-3))
        })
    }
}

/// Converged grid solution.
#[derive(Debug, Clone)]
pub struct CorrectorSolution<T> {
    pub grid: Grid<T>,
    /// Potential at every node, `w[center] = 0`.
    pub w: Vec<T>,
    pub a_bar: T,
    pub policy: PolicyField,
    /// Ordered pairs `(from, to)` whose gradient constraint binds, per node.
    pub binding_sets: Vec<Vec<(usize, usize)>>,
    pub iterations: usize,
    pub residual_norm: T,
    /// Eigenvalue after each policy evaluation.
    pub a_history: Vec<T>,
    pub tol_switch: T,
    pub tol_bind: T,
    /// Some axis weight of the generator stencil is negative.
    pub non_monotone: bool,
    pub neumann_nodes: usize,
}

impl<T: Scalar> CorrectorSolution<T> {
    /// Nodes whose policy is `Diffuse`.
    pub fn nt_nodes(&self) -> Vec<usize> {
        (0..self.w.len()).filter(|&k| self.policy.actions[k] == Action::Diffuse).collect()
    }
}
