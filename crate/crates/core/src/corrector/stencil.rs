use crate::corrector::{CorrectorProblem, TransferPair};
use crate::error::{Error, Result};
use crate::grid::{axis_step, negate, Grid, Offset};
use crate::scalar::Scalar;

/// Monotone (Kushner-Dupuis) discretization of `1/2 Tr(A D^2 w)` written as
/// `sum_s c_s (w(rho + h s) - w(rho))` over neighbor steps `s`.
#[derive(Debug, Clone)]
pub(crate) struct Stencil<T> {
    pub(crate) terms: Vec<(Offset, T)>,
    /// `sum_s c_s`.
    pub(crate) total: T,
    pub(crate) non_monotone: bool,
}

impl<T: Scalar> Stencil<T> {
    pub(crate) fn new(problem: &CorrectorProblem<T>) -> Self {
        let a = problem.diffusion();
        let d = problem.d();
        let h2 = problem.grid.h() * problem.grid.h();
        let mut terms = Vec::new();
        let mut non_monotone = false;
        for i in 0..d {
            let off: T = (0..d).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            let c = (a[(i, i)] - off) / (T::two() * h2);
            non_monotone |= c < T::zero();
            let s = axis_step(i);
            terms.push((s, c));
            terms.push((negate(&s), c));
        }
        for i in 0..d {
            for j in i + 1..d {
                let aij = a[(i, j)];
                if aij == T::zero() {
                    continue;
                }
                let mut s = axis_step(i);
                s[j] = if aij > T::zero() { 1 } else { -1 };
                let c = aij.abs() / (T::two() * h2);
                terms.push((s, c));
                terms.push((negate(&s), c));
            }
        }
        terms.retain(|&(_, c)| c != T::zero());
        let total = terms.iter().map(|&(_, c)| c).sum();
        Self { terms, total, non_monotone }
    }

    /// Neighbor indices and weights, or `None` when the stencil leaves the grid.
    pub(crate) fn neighbors(&self, grid: &Grid<T>, node: usize) -> Option<Vec<(usize, T)>> {
        if grid.is_boundary(node) {
            return None;
        }
        self.terms.iter().map(|(s, c)| grid.shift(node, s).map(|k| (k, *c))).collect()
    }

    pub(crate) fn apply(&self, grid: &Grid<T>, w: &[T], node: usize) -> Option<T> {
        let nb = self.neighbors(grid, node)?;
        let wk = w[node];
        Some(nb.iter().map(|&(k, c)| c * (w[k] - wk)).sum())
    }
}

/// Discrete `1/2 Tr(alpha_bar alpha_bar^T D^2 w)` at an interior node.
pub fn apply_generator<T: Scalar>(w: &[T], node: usize, problem: &CorrectorProblem<T>) -> Result<T> {
    Stencil::new(problem).apply(&problem.grid, w, node).ok_or(Error::StencilOutOfDomain(node))
}

pub(crate) fn pair_residual<T: Scalar>(grid: &Grid<T>, w: &[T], node: usize, pair: &TransferPair<T>) -> Option<T> {
    let target = grid.shift(node, &pair.step)?;
    Some((w[node] - w[target]) / grid.h() - pair.lambda)
}

/// `(w(rho) - w(rho + h d)) / h - lambda[from][to]` with `d = e_to - e_from`;
/// the gradient constraint holds when this is `<= 0`.
pub fn transfer_residual<T: Scalar>(w: &[T], node: usize, from: usize, to: usize, problem: &CorrectorProblem<T>) -> Result<T> {
    let pair = problem
        .pairs()
        .into_iter()
        .find(|p| p.from == from && p.to == to)
        .ok_or_else(|| Error::InvalidParams(format!("transfer {from}->{to} is forbidden")))?;
    pair_residual(&problem.grid, w, node, &pair).ok_or(Error::StencilOutOfDomain(node))
}
