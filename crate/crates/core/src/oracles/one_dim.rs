use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Closed-form solution of the one-dimensional first corrector equation.
///
/// Inside `[-rho_plus, rho_plus]` the potential solves
/// `alpha^2 w'' / 2 = a_bar - sigma^2 rho^2 / 2`; outside it is affine with
/// slopes `lambda10` (right) and `-lambda01` (left). Smooth pasting
/// (`w''(+-rho_plus) = 0`) makes the boundaries symmetric even when the
/// costs are not; the asymmetry sits in the linear term `slope_shift * rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneDimSolution<T> {
    pub sigma: T,
    pub alpha: T,
    pub lambda01: T,
    pub lambda10: T,
    pub rho_plus: T,
    pub a_bar: T,
    pub slope_shift: T,
}

pub fn solve_1d_closed_form<T: Scalar>(sigma: T, alpha: T, lambda01: T, lambda10: T) -> Result<OneDimSolution<T>> {
    if sigma == T::zero() || alpha == T::zero() || !sigma.is_finite() || !alpha.is_finite() {
        return Err(Error::DegenerateInput("sigma and alpha must be finite and non-zero".into()));
    }
    if !(lambda01 >= T::zero() && lambda10 >= T::zero()) || !(lambda01 + lambda10).is_finite() {
        return Err(Error::DegenerateInput("costs must be finite and non-negative".into()));
    }
    let (s2, a2) = (sigma * sigma, alpha * alpha);
    let rho_plus = (T::lit(3.0) * a2 * (lambda01 + lambda10) / (T::lit(4.0) * s2)).cbrt();
    Ok(OneDimSolution {
        sigma,
        alpha,
        lambda01,
        lambda10,
        rho_plus,
        a_bar: s2 * rho_plus * rho_plus / T::two(),
        slope_shift: (lambda10 - lambda01) / T::two(),
    })
}

impl<T: Scalar> OneDimSolution<T> {
    fn inner(&self, rho: T) -> T {
        let (s2, a2) = (self.sigma * self.sigma, self.alpha * self.alpha);
        (self.a_bar * rho * rho - s2 * rho.powi(4) / T::lit(12.0)) / a2 + self.slope_shift * rho
    }

    pub fn w(&self, rho: T) -> T {
        let rp = self.rho_plus;
        if rho > rp {
            self.inner(rp) + self.lambda10 * (rho - rp)
        } else if rho < -rp {
            self.inner(-rp) + self.lambda01 * (-rp - rho)
        } else {
            self.inner(rho)
        }
    }

    pub fn dw(&self, rho: T) -> T {
        let rp = self.rho_plus;
        if rho > rp {
            self.lambda10
        } else if rho < -rp {
            -self.lambda01
        } else {
            let (s2, a2) = (self.sigma * self.sigma, self.alpha * self.alpha);
            (T::two() * self.a_bar * rho - s2 * rho.powi(3) / T::lit(3.0)) / a2 + self.slope_shift
        }
    }

    pub fn d2w(&self, rho: T) -> T {
        if rho.abs() > self.rho_plus {
            T::zero()
        } else {
            let (s2, a2) = (self.sigma * self.sigma, self.alpha * self.alpha);
            (T::two() * self.a_bar - s2 * rho * rho) / a2
        }
    }

    /// Residual of `a_bar - alpha^2 w''/2 - sigma^2 rho^2/2` (zero inside the NT interval).
    pub fn interior_residual(&self, rho: T) -> T {
        self.a_bar - self.alpha * self.alpha * self.d2w(rho) / T::two() - self.sigma * self.sigma * rho * rho / T::two()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_instance_values() {
        let s = solve_1d_closed_form(1.0f64, 1.0, 0.001, 0.001).unwrap();
        // 0.0015^(1/3) and half its square.
        assert!((s.rho_plus - 0.114_471_424_255_333_2).abs() < 1e-12);
        assert!((s.a_bar - 0.006_551_853_485_522_24).abs() < 1e-12);
        assert_eq!(s.slope_shift, 0.0);
    }

    #[test]
    fn smooth_pasting_and_ode() {
        for &(l01, l10, sig, alp) in &[(0.001, 0.001, 1.0, 1.0), (0.0, 0.002, 0.7, 1.3), (0.003, 0.0005, 2.0, 0.4)] {
            let s = solve_1d_closed_form::<f64>(sig, alp, l01, l10).unwrap();
            let rp = s.rho_plus;
            assert!((s.dw(rp) - l10).abs() < 1e-15);
            assert!((s.dw(-rp) + l01).abs() < 1e-15);
            assert!(s.d2w(rp).abs() < 1e-15 * (1.0 + s.a_bar));
            assert!(s.d2w(-rp).abs() < 1e-15 * (1.0 + s.a_bar));
            for k in 0..=20 {
                let rho = -rp + 2.0 * rp * k as f64 / 20.0;
                assert!(s.interior_residual(rho).abs() < 1e-12);
            }
            assert_eq!(s.w(0.0), 0.0);
        }
    }

    #[test]
    fn costless_case_is_trivial() {
        let s = solve_1d_closed_form(1.0f64, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(s.rho_plus, 0.0);
        assert_eq!(s.a_bar, 0.0);
        assert_eq!(s.w(0.3), 0.0);
    }

    #[test]
    fn asymmetric_costs_keep_symmetric_boundaries() {
        let sym = solve_1d_closed_form(1.0f64, 1.0, 0.001, 0.001).unwrap();
        let asym = solve_1d_closed_form(1.0f64, 1.0, 0.0, 0.002).unwrap();
        assert!((sym.rho_plus - asym.rho_plus).abs() < 1e-15);
        assert!((asym.slope_shift - 0.001).abs() < 1e-18);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(solve_1d_closed_form(0.0, 1.0, 0.001, 0.001).is_err());
        assert!(solve_1d_closed_form(1.0, 0.0, 0.001, 0.001).is_err());
        assert!(solve_1d_closed_form(1.0, 1.0, -0.001, 0.001).is_err());
    }
}
