use crate::error::{Error, Result};
use crate::linalg::sparse::CsrMatrix;
use crate::linalg::LinearSolver;
use crate::scalar::Scalar;

/// ILU(0) factors sharing the sparsity pattern of the input matrix.
#[derive(Debug, Clone)]
struct Ilu0<T> {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    diag_pos: Vec<usize>,
}

impl<T: Scalar> Ilu0<T> {
    fn new(a: &CsrMatrix<T>) -> Result<Self> {
        let (rp, ci, v) = a.parts();
        let n = a.n_rows();
        let mut values = v.to_vec();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in rp[i]..rp[i + 1] {
                if ci[p] == i {
                    diag_pos[i] = p;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(Error::SingularSystem(format!("row {i} has no diagonal entry")));
            }
        }
        // Column -> position lookup for the current row.
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in rp[i]..rp[i + 1] {
                pos[ci[p]] = p;
            }
            for p in rp[i]..diag_pos[i] {
                let k = ci[p];
                let dk = values[diag_pos[k]];
                if dk == T::zero() {
                    return Err(Error::SingularSystem(format!("ILU(0) zero pivot at row {k}")));
                }
                let f = values[p] / dk;
                values[p] = f;
                for q in diag_pos[k] + 1..rp[k + 1] {
                    let c = ci[q];
                    if pos[c] != usize::MAX {
                        let u = values[q];
                        values[pos[c]] -= f * u;
                    }
                }
            }
            for p in rp[i]..rp[i + 1] {
                pos[ci[p]] = usize::MAX;
            }
        }
        Ok(Self { row_ptr: rp.to_vec(), col_idx: ci.to_vec(), values, diag_pos })
    }

    fn apply(&self, b: &[T]) -> Vec<T> {
        let n = b.len();
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for p in self.row_ptr[i]..self.diag_pos[i] {
                s -= self.values[p] * x[self.col_idx[p]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in self.diag_pos[i] + 1..self.row_ptr[i + 1] {
                s -= self.values[p] * x[self.col_idx[p]];
            }
            x[i] = s / self.values[self.diag_pos[i]];
        }
        x
    }
}

/// Right-preconditioned BiCGSTAB with an ILU(0) preconditioner.
#[derive(Debug, Clone)]
pub struct BiCgStab<T> {
    a: CsrMatrix<T>,
    ilu: Ilu0<T>,
    rel_tol: T,
    max_iters: usize,
}

impl<T: Scalar> BiCgStab<T> {
    pub fn new(a: CsrMatrix<T>, rel_tol: T, max_iters: usize) -> Result<Self> {
        let ilu = Ilu0::new(&a)?;
        Ok(Self { a, ilu, rel_tol, max_iters })
    }
}

fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

fn norm<T: Scalar>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

impl<T: Scalar> LinearSolver<T> for BiCgStab<T> {
    fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = b.len();
        let bnorm = norm(b);
        let mut x = vec![T::zero(); n];
        if bnorm == T::zero() {
            return Ok(x);
        }
        let target = self.rel_tol * bnorm;
        let mut r = b.to_vec();
        let r_hat = r.clone();
        let mut p = vec![T::zero(); n];
        let mut v = vec![T::zero(); n];
        let (mut rho_old, mut alpha, mut omega) = (T::one(), T::one(), T::one());
        for _ in 0..self.max_iters {
            let rho = dot(&r_hat, &r);
            if rho == T::zero() {
                return Err(Error::LinearSolveFailure("BiCGSTAB breakdown (rho = 0)".into()));
            }
            let beta = (rho / rho_old) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            let p_hat = self.ilu.apply(&p);
            v = self.a.mul_vec(&p_hat);
            alpha = rho / dot(&r_hat, &v);
            let s: Vec<T> = r.iter().zip(&v).map(|(&ri, &vi)| ri - alpha * vi).collect();
            if norm(&s) <= target {
                for i in 0..n {
                    x[i] += alpha * p_hat[i];
                }
                return Ok(x);
            }
            let s_hat = self.ilu.apply(&s);
            let t = self.a.mul_vec(&s_hat);
            let tt = dot(&t, &t);
            omega = if tt > T::zero() { dot(&t, &s) / tt } else { T::zero() };
            for i in 0..n {
                x[i] += alpha * p_hat[i] + omega * s_hat[i];
                r[i] = s[i] - omega * t[i];
            }
            if norm(&r) <= target {
                return Ok(x);
            }
            if omega == T::zero() {
                return Err(Error::LinearSolveFailure("BiCGSTAB breakdown (omega = 0)".into()));
            }
            rho_old = rho;
        }
        Err(Error::LinearSolveFailure(format!("BiCGSTAB did not reach {:e} in {} iterations", self.rel_tol, self.max_iters)))
    }
}
