//! Frictionless Merton problem for power utility with constant coefficients,
//! the normalization constants of the corrector equations, and the maps from
//! corrector output back to portfolio coordinates.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Proportional cost factors `lambda[i][j]` for a transfer from account `i`
/// to account `j` (index 0 is cash). `None` marks a forbidden transfer.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    size: usize,
    entries: Vec<Option<T>>,
}

impl<T: Scalar> CostMatrix<T> {
    /// Builds from `f64` rows; `f64::INFINITY` becomes a forbidden transfer.
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidParams("cost matrix must be square".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v.is_nan() || v < 0.0 {
                    return Err(Error::InvalidParams(format!("lambda[{i}][{j}] = {v} must be >= 0")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidParams(format!("lambda[{i}][{i}] must be 0")));
                }
                entries.push(if v.is_infinite() { None } else { Some(T::lit(v)) });
            }
        }
        Ok(Self { size, entries })
    }

    /// Cash-only structure: `cash_out[i]` is `lambda[0][i+1]`, `cash_in[i]` is `lambda[i+1][0]`.
    pub fn cash_only(cash_out: &[f64], cash_in: &[f64]) -> Result<Self> {
        let d = cash_out.len();
        let mut rows = vec![vec![f64::INFINITY; d + 1]; d + 1];
        for i in 0..=d {
            rows[i][i] = 0.0;
        }
        for i in 0..d {
            rows[0][i + 1] = cash_out[i];
            rows[i + 1][0] = cash_in[i];
        }
        Self::from_f64_rows(&rows)
    }

    /// Every transfer allowed at the same cost.
    pub fn uniform(d: usize, cost: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..=d).map(|i| (0..=d).map(|j| if i == j { 0.0 } else { cost }).collect()).collect();
        Self::from_f64_rows(&rows)
    }

    /// Number of accounts, `d + 1`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.entries[i * self.size + j]
    }

    /// Finite off-diagonal pairs `(i, j, lambda)` in lexicographic order.
    pub fn finite_pairs(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..self.size {
            for j in 0..self.size {
                if i != j {
                    if let Some(l) = self.get(i, j) {
                        out.push((i, j, l));
                    }
                }
            }
        }
        out
    }

    /// Largest finite entry (0 when every transfer is forbidden).
    pub fn max_finite(&self) -> T {
        self.entries.iter().flatten().fold(T::zero(), |m, &v| m.max(v))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { size: self.size, entries: self.entries.iter().map(|e| e.map(|v| v * factor)).collect() }
    }

    /// `f64` view with `INFINITY` for forbidden transfers.
    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j).map_or(f64::INFINITY, Scalar::to_f64_lossy)).collect())
            .collect()
    }
}

/// Market and preference constants.
#[derive(Debug, Clone)]
pub struct MarketParams<T> {
    pub mu: Vec<T>,
    pub r: T,
    pub sigma: Matrix<T>,
    pub beta: T,
    pub p: T,
    pub lambda: CostMatrix<T>,
    pub epsilon: T,
}

impl<T: Scalar> MarketParams<T> {
    pub fn new(mu: Vec<T>, r: T, sigma: Matrix<T>, beta: T, p: T, lambda: CostMatrix<T>, epsilon: T) -> Result<Self> {
        let params = Self { mu, r, sigma, beta, p, lambda, epsilon };
        params.validate()?;
        Ok(params)
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if d == 0 {
            return Err(Error::InvalidParams("at least one risky asset is required".into()));
        }
        if self.sigma.rows() != d || self.sigma.cols() != d {
            return Err(Error::InvalidParams(format!("sigma must be {d}x{d}")));
        }
        if self.lambda.size() != d + 1 {
            return Err(Error::InvalidParams(format!("lambda must be {}x{}", d + 1, d + 1)));
        }
        if !(self.p > T::zero() && self.p < T::one()) {
            return Err(Error::InvalidParams(format!("p = {} must lie in (0, 1)", self.p)));
        }
        if !(self.epsilon >= T::zero()) {
            return Err(Error::InvalidParams("epsilon must be >= 0".into()));
        }
        let finite = self.mu.iter().all(|x| x.is_finite())
            && self.r.is_finite()
            && self.beta.is_finite()
            && self.sigma.is_finite();
        if !finite {
            return Err(Error::InvalidParams("market constants must be finite".into()));
        }
        let cov = self.sigma.gram();
        if cov.solve(&vec![T::zero(); d]).is_none() {
            return Err(Error::SingularVolatility);
        }
        Ok(())
    }

    /// `mu - r 1`.
    pub fn excess_return(&self) -> Vec<T> {
        self.mu.iter().map(|&m| m - self.r).collect()
    }
}

/// Frictionless optimizers. The value function is `v(z) = v_k z^p / p`, the
/// optimal risky positions are `y(z) = pi z` and consumption is `c0 z`.
#[derive(Debug, Clone)]
pub struct MertonSolution<T> {
    pub pi: Vec<T>,
    pub c0: T,
    pub v_k: T,
    pub p: T,
    /// `eta(z) / z = 1 / (1 - p)`.
    pub eta_factor: T,
    /// Squared market price of risk `(mu - r)^T (sigma sigma^T)^{-1} (mu - r)`.
    pub sharpe_sq: T,
    /// Growth rate with `beta > p * kappa1` required for a finite value.
    pub kappa1: T,
    /// `A(z^p) = kappa2 z^p` for the second corrector operator.
    pub kappa2: T,
    /// Normalized diffusion of the fast variable, constant in `z`.
    pub alpha_bar: Matrix<T>,
    pub a_bar: Option<T>,
    pub u0: Option<T>,
}

/// Closed-form Merton solution.
pub fn solve_merton<T: Scalar>(params: &MarketParams<T>) -> Result<MertonSolution<T>> {
    params.validate()?;
    let d = params.d();
    let one = T::one();
    let p = params.p;
    let excess = params.excess_return();
    let cov = params.sigma.gram();
    let cov_inv_excess = cov.solve(&excess).ok_or(Error::SingularVolatility)?;
    let sharpe_sq: T = excess.iter().zip(&cov_inv_excess).map(|(&a, &b)| a * b).sum();
    let pi: Vec<T> = cov_inv_excess.iter().map(|&x| x / (one - p)).collect();

    let kappa1 = params.r + sharpe_sq / (T::two() * (one - p));
    if !(params.beta > p * kappa1) {
        return Err(Error::NonFiniteValue { beta: params.beta.to_f64_lossy(), threshold: (p * kappa1).to_f64_lossy() });
    }
    let c0 = (params.beta - p * kappa1) / (one - p);
    let v_k = c0.powf(p - one);

    let pi_excess: T = pi.iter().zip(&excess).map(|(&a, &b)| a * b).sum();
    let st_pi = params.sigma.transpose().mul_vec(&pi);
    let st_pi_sq: T = st_pi.iter().map(|&x| x * x).sum();
    let kappa2 = params.beta - p * (params.r + pi_excess - c0) + T::half() * p * (one - p) * st_pi_sq;

    let alpha_bar = normalized_diffusion(&pi, &params.sigma, p);
    debug_assert_eq!(alpha_bar.rows(), d);

    Ok(MertonSolution { pi, c0, v_k, p, eta_factor: one / (one - p), sharpe_sq, kappa1, kappa2, alpha_bar, a_bar: None, u0: None })
}

/// `(1 - p) (I - pi 1^T) diag(pi) sigma`.
fn normalized_diffusion<T: Scalar>(pi: &[T], sigma: &Matrix<T>, p: T) -> Matrix<T> {
    let d = pi.len();
    let mut m = Matrix::identity(d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] -= pi[i];
        }
    }
    let m = &m * &Matrix::from_diagonal(pi);
    (&m * sigma).scale(T::one() - p)
}

/// Effective diffusion `alpha_bar`, rejected when `alpha_bar alpha_bar^T` has
/// an eigenvalue below `floor`.
pub fn effective_diffusion<T: Scalar>(sol: &MertonSolution<T>, floor: T) -> Result<Matrix<T>> {
    check_nondegenerate(&sol.alpha_bar, floor)?;
    Ok(sol.alpha_bar.clone())
}

/// Smallest eigenvalue of `alpha alpha^T` must reach `floor`.
pub fn check_nondegenerate<T: Scalar>(alpha: &Matrix<T>, floor: T) -> Result<T> {
    let min_eig = alpha.gram().symmetric_eigenvalues()[0];
    if !(min_eig >= floor) || min_eig <= T::zero() {
        return Err(Error::DegenerateDiffusion { min_eig: min_eig.to_f64_lossy(), floor: floor.to_f64_lossy() });
    }
    Ok(min_eig)
}

impl<T: Scalar> MertonSolution<T> {
    pub fn value(&self, z: T) -> T {
        self.v_k * z.powf(self.p) / self.p
    }

    pub fn value_z(&self, z: T) -> T {
        self.v_k * z.powf(self.p - T::one())
    }

    pub fn value_zz(&self, z: T) -> T {
        (self.p - T::one()) * self.v_k * z.powf(self.p - T::two())
    }

    pub fn eta(&self, z: T) -> T {
        self.eta_factor * z
    }

    pub fn consumption(&self, z: T) -> T {
        self.c0 * z
    }

    /// Residual of the stationary Merton HJB at `z`, Hamiltonian evaluated at
    /// the optimal position and consumption.
    pub fn hjb_residual(&self, params: &MarketParams<T>, z: T) -> T {
        let (vz, vzz) = (self.value_z(z), self.value_zz(z));
        let p = self.p;
        // U~(y) = sup_c c^p/p - c y
        let c = self.consumption(z);
        let u_tilde = c.powf(p) / p - c * vz;
        let theta: Vec<T> = self.pi.iter().map(|&x| x * z).collect();
        let excess = params.excess_return();
        let lin: T = theta.iter().zip(&excess).map(|(&a, &b)| a * b).sum::<T>() * vz;
        let st = params.sigma.transpose().mul_vec(&theta);
        let quad: T = st.iter().map(|&x| x * x).sum::<T>() * T::half() * vzz;
        params.beta * self.value(z) - params.r * z * vz - u_tilde - (lin + quad)
    }

    /// Fills the eigenvalue slot and the second corrector coefficient.
    pub fn with_corrector(mut self, a_bar: T) -> Result<Self> {
        self.u0 = Some(second_corrector_value(&self, a_bar)?);
        self.a_bar = Some(a_bar);
        Ok(self)
    }
}

/// Coefficient `u0` of `u(z) = u0 z^p` solving `A u = v_z eta a_bar`.
pub fn second_corrector_value<T: Scalar>(sol: &MertonSolution<T>, a_bar: T) -> Result<T> {
    if !a_bar.is_finite() {
        return Err(Error::InvalidParams("a_bar must be finite".into()));
    }
    if !(sol.kappa2 > T::zero()) {
        return Err(Error::IllPosedCorrector(sol.kappa2.to_f64_lossy()));
    }
    Ok(sol.v_k * a_bar / ((T::one() - sol.p) * sol.kappa2))
}

/// `v(z) - epsilon^2 u(z)`; the correction is dropped when `u0` is unset.
pub fn expansion_value<T: Scalar>(sol: &MertonSolution<T>, z: T, epsilon: T) -> T {
    let v = sol.value(z);
    match sol.u0 {
        Some(u0) if epsilon != T::zero() => v - epsilon * epsilon * u0 * z.powf(sol.p),
        _ => v,
    }
}

/// Maps fast-variable points to risky positions: `y = pi z + epsilon eta(z) rho`.
pub fn map_nt_region<T: Scalar>(sol: &MertonSolution<T>, z: T, epsilon: T, points: &[Vec<T>]) -> Vec<Vec<T>> {
    let scale = epsilon * sol.eta(z);
    points
        .iter()
        .map(|rho| sol.pi.iter().zip(rho).map(|(&pi, &r)| pi * z + scale * r).collect())
        .collect()
}
