use crate::corrector::CorrectorProblem;
use crate::error::{Error, Result};
use crate::oracles::one_dim::{solve_1d_closed_form, OneDimSolution};
use crate::scalar::Scalar;

/// Sum of independent one-dimensional solutions, exact when both the cost
/// and diffusion matrices are diagonal and only cash transfers are allowed.
#[derive(Debug, Clone)]
pub struct SeparableSolution<T> {
    pub axes: Vec<OneDimSolution<T>>,
    pub a_bar: T,
}

pub fn separable_solution<T: Scalar>(per_axis: Vec<OneDimSolution<T>>) -> SeparableSolution<T> {
    let a_bar = per_axis.iter().map(|s| s.a_bar).sum();
    SeparableSolution { axes: per_axis, a_bar }
}

/// Builds the separable solution for a problem, or explains why it does not apply.
pub fn separable_from_problem<T: Scalar>(problem: &CorrectorProblem<T>) -> Result<SeparableSolution<T>> {
    let d = problem.d();
    if !problem.sigma.is_diagonal() || !problem.alpha_bar.is_diagonal() {
        return Err(Error::InapplicableStructure("sigma and alpha_bar must be diagonal".into()));
    }
    for i in 1..=d {
        for j in 1..=d {
            if i != j && problem.lambda.get(i, j).is_some() {
                return Err(Error::InapplicableStructure(format!("asset-to-asset transfer {i}->{j} is allowed")));
            }
        }
    }
    let axes = (0..d)
        .map(|k| {
            let l01 = problem.lambda.get(0, k + 1);
            let l10 = problem.lambda.get(k + 1, 0);
            match (l01, l10) {
                (Some(a), Some(b)) => solve_1d_closed_form(problem.sigma[(k, k)], problem.alpha_bar[(k, k)], a, b),
                _ => Err(Error::InapplicableStructure(format!("cash transfers of asset {} must be finite", k + 1))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(separable_solution(axes))
}

impl<T: Scalar> SeparableSolution<T> {
    pub fn w(&self, rho: &[T]) -> T {
        self.axes.iter().zip(rho).map(|(s, &x)| s.w(x)).sum()
    }

    pub fn gradient(&self, rho: &[T]) -> Vec<T> {
        self.axes.iter().zip(rho).map(|(s, &x)| s.dw(x)).collect()
    }

    /// Diagonal of the Hessian (off-diagonal entries vanish).
    pub fn hessian_diag(&self, rho: &[T]) -> Vec<T> {
        self.axes.iter().zip(rho).map(|(s, &x)| s.d2w(x)).collect()
    }

    /// Half-widths of the product no-transaction box.
    pub fn nt_half_widths(&self) -> Vec<T> {
        self.axes.iter().map(|s| s.rho_plus).collect()
    }

    /// `a - 1/2 sum a_kk w_kk - 1/2 sum sigma_k^2 rho_k^2`.
    pub fn pde_residual(&self, rho: &[T]) -> T {
        let hess = self.hessian_diag(rho);
        let mut r = self.a_bar;
        for ((s, &x), &hk) in self.axes.iter().zip(rho).zip(&hess) {
            r -= s.alpha * s.alpha * hk / T::two() + s.sigma * s.sigma * x * x / T::two();
        }
        r
    }
}
