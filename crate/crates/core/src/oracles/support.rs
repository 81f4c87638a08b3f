use crate::error::{Error, Result};
use crate::market::CostMatrix;
use crate::scalar::Scalar;

/// Support function `sup { u . rho : u in C }` of the gradient polytope
///
/// `C = { u : u_i - u_j <= lambda[i][j] for all finite pairs }`, `u_0 = 0`,
///
/// solved as a small linear program with a dense tableau and Bland's rule.
pub fn delta_c<T: Scalar>(rho: &[T], lambda: &CostMatrix<T>) -> Result<T> {
    let d = lambda.size() - 1;
    assert_eq!(rho.len(), d, "direction dimension must match the cost matrix");
    if rho.iter().all(|&x| x == T::zero()) {
        return Ok(T::zero());
    }
    let pairs = lambda.finite_pairs();
    let m = pairs.len();
    let nv = 2 * d; // u+ and u-
    let cols = nv + m + 1; // variables, slacks, rhs
    let mut tab = vec![T::zero(); (m + 1) * cols];
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    for (r, &(i, j, l)) in pairs.iter().enumerate() {
        let row = &mut tab[r * cols..(r + 1) * cols];
        if i > 0 {
            row[i - 1] += T::one();
            row[d + i - 1] -= T::one();
        }
        if j > 0 {
            row[j - 1] -= T::one();
            row[d + j - 1] += T::one();
        }
        row[nv + r] = T::one();
        row[cols - 1] = l;
    }
    // Objective row stores reduced costs of the maximization.
    {
        let obj = &mut tab[m * cols..];
        for k in 0..d {
            obj[k] = rho[k];
            obj[d + k] = -rho[k];
        }
    }
    let tol = T::epsilon() * T::lit(64.0);
    let max_pivots = 50 * (cols + m).max(16);
    for _ in 0..max_pivots {
        let obj = &tab[m * cols..];
        let Some(enter) = (0..cols - 1).find(|&c| obj[c] > tol) else {
            return Ok(-tab[m * cols + cols - 1]);
        };
        let mut leave: Option<(usize, T)> = None;
        for r in 0..m {
            let a = tab[r * cols + enter];
            if a > tol {
                let ratio = tab[r * cols + cols - 1] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio || (ratio == lratio && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            return Err(Error::UnboundedDirection);
        };
        pivot(&mut tab, cols, m + 1, pr, enter);
        basis[pr] = enter;
    }
    Err(Error::LinearSolveFailure("simplex pivot limit reached".into()))
}

fn pivot<T: Scalar>(tab: &mut [T], cols: usize, rows: usize, pr: usize, pc: usize) {
    let inv = T::one() / tab[pr * cols + pc];
    for c in 0..cols {
        tab[pr * cols + c] *= inv;
    }
    for r in 0..rows {
        if r == pr {
            continue;
        }
        let f = tab[r * cols + pc];
        if f == T::zero() {
            continue;
        }
        for c in 0..cols {
            let v = tab[pr * cols + c];
            tab[r * cols + c] -= f * v;
        }
    }
}
