//! Linear algebra: small dense matrices for the market blocks and sparse
//! solvers for the grid systems.

mod banded;
mod dense;
mod krylov;
mod sparse;

pub use banded::{BandedLu, BandedMatrix};
pub use dense::Matrix;
pub use krylov::BiCgStab;
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A factorized (or preconditioned) square operator that can be solved repeatedly.
pub trait LinearSolver<T: Scalar>: Send + Sync {
    fn solve(&self, b: &[T]) -> Result<Vec<T>>;
}

/// Solves the bordered system
///
/// ```text
/// [ B    c ] [x]   [f]
/// [ r^T  s ] [y] = [g]
/// ```
///
/// with two solves against a factorization of `B`.
pub fn solve_bordered<T: Scalar>(
    b_solver: &dyn LinearSolver<T>,
    col: &[T],
    row: &[(usize, T)],
    corner: T,
    f: &[T],
    g: T,
) -> Result<(Vec<T>, T)> {
    let u = b_solver.solve(f)?;
    let z = b_solver.solve(col)?;
    let ru: T = row.iter().map(|&(j, v)| v * u[j]).sum();
    let rz: T = row.iter().map(|&(j, v)| v * z[j]).sum();
    let schur = corner - rz;
    let scale = corner.abs() + row.iter().map(|&(j, v)| (v * z[j]).abs()).sum::<T>();
    if !(schur.abs() > T::epsilon() * T::lit(64.0) * scale) {
        return Err(Error::SingularSystem("bordered Schur complement vanishes".into()));
    }
    let y = (g - ru) / schur;
    let x = u.iter().zip(&z).map(|(&ui, &zi)| ui - y * zi).collect();
    Ok((x, y))
}
