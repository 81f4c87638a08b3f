use crate::error::{Error, Result};
use crate::linalg::sparse::CsrMatrix;
use crate::linalg::LinearSolver;
use crate::scalar::Scalar;

/// Square band matrix stored row by row; row `i` holds columns `i-kl ..= i+ku`.
#[derive(Debug, Clone)]
pub struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![T::zero(); n * (kl + ku + 1)] }
    }

    pub fn from_csr(a: &CsrMatrix<T>) -> Self {
        assert_eq!(a.n_rows(), a.n_cols());
        let (kl, ku) = a.bandwidths();
        let mut b = Self::zeros(a.n_rows(), kl, ku);
        for i in 0..a.n_rows() {
            for (c, v) in a.row(i) {
                *b.entry_mut(i, c) += v;
            }
        }
        b
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    fn entry_mut(&mut self, i: usize, j: usize) -> &mut T {
        debug_assert!(j + self.kl >= i && j <= i + self.ku);
        let w = self.width();
        &mut self.data[i * w + j + self.kl - i]
    }

    /// In-place LU without pivoting. The grid systems are M-matrices (or close
    /// to it), for which every pivot stays positive.
    pub fn factorize(mut self) -> Result<BandedLu<T>> {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width());
        // Pivots are judged against their own original row, since rows of
        // very different magnitude share the matrix.
        let floors: Vec<T> = self
            .data
            .chunks(w)
            .map(|row| row.iter().fold(T::zero(), |m, &x| m.max(x.abs())) * T::epsilon() * T::lit(16.0))
            .collect();
        for k in 0..n {
            let pivot = self.data[k * w + kl];
            if !(pivot.abs() > floors[k]) || !pivot.is_finite() {
                return Err(Error::SingularSystem(format!("zero pivot at row {k}")));
            }
            let inv = T::one() / pivot;
            let hi = (k + ku).min(n - 1);
            let ilast = (k + kl).min(n - 1);
            // Split borrows: pivot row is before every updated row.
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let prow = &head[k * w + kl + 1..k * w + kl + 1 + (hi - k)];
            for i in k + 1..=ilast {
                let base = (i - k - 1) * w;
                let lik_pos = base + k + kl - i;
                let lik = tail[lik_pos];
                if lik == T::zero() {
                    continue;
                }
                let f = lik * inv;
                tail[lik_pos] = f;
                let start = base + k + 1 + kl - i;
                let dst = &mut tail[start..start + (hi - k)];
                for (d, &p) in dst.iter_mut().zip(prow) {
                    *d -= f * p;
                }
            }
        }
        Ok(BandedLu { m: self })
    }
}

/// Factorization produced by [`BandedMatrix::factorize`].
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    m: BandedMatrix<T>,
}

impl<T: Scalar> LinearSolver<T> for BandedLu<T> {
    fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let BandedMatrix { n, kl, ku, ref data } = self.m;
        let w = kl + ku + 1;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let mut s = x[i];
            for j in lo..i {
                s -= data[i * w + j + kl - i] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + ku).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= data[i * w + j + kl - i] * x[j];
            }
            x[i] = s / data[i * w + kl];
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::LinearSolveFailure("non-finite banded solution".into()))
        }
    }
}
