#![allow(dead_code)]

use corrector_core::{CorrectorProblem, CostMatrix, MarketParams, Matrix, MertonSolution};

pub const INF: f64 = f64::INFINITY;

pub fn matrix(rows: &[Vec<f64>]) -> Matrix<f64> {
    Matrix::from_f64_rows(rows).unwrap()
}

pub fn costs(rows: &[Vec<f64>]) -> CostMatrix<f64> {
    CostMatrix::from_f64_rows(rows).unwrap()
}

/// sigma = alpha_bar = 1, lambda = 0.001 both ways.
pub fn standard_1d(n: usize) -> CorrectorProblem<f64> {
    let one = matrix(&[vec![1.0]]);
    CorrectorProblem::with_auto_radius(one.clone(), one, costs(&[vec![0.0, 0.001], vec![0.001, 0.0]]), n).unwrap()
}

pub fn cash_only(a: f64, b: f64) -> CostMatrix<f64> {
    costs(&[vec![0.0, a, b], vec![a, 0.0, INF], vec![b, INF, 0.0]])
}

pub fn all_transfers(cost: f64) -> CostMatrix<f64> {
    costs(&[vec![0.0, cost, cost], vec![cost, 0.0, cost], vec![cost, cost, 0.0]])
}

pub fn sigma_uncorrelated() -> Matrix<f64> {
    matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]])
}

/// `[[1, -c], [-c, 1]]`.
pub fn sigma_sym(c: f64) -> Matrix<f64> {
    matrix(&[vec![1.0, -c], vec![-c, 1.0]])
}

/// Two-asset instance with alpha_bar = sigma.
pub fn two_asset(sigma: Matrix<f64>, lambda: CostMatrix<f64>, n: usize) -> CorrectorProblem<f64> {
    CorrectorProblem::with_auto_radius(sigma.clone(), sigma, lambda, n).unwrap()
}

/// Twelve instances covering one and two assets, correlations of both
/// signs, asymmetric costs, asset-to-asset transfers and a market-derived
/// diffusion.
pub fn instance_matrix(n1: usize, n2: usize) -> Vec<(&'static str, CorrectorProblem<f64>)> {
    let one = matrix(&[vec![1.0]]);
    let half = matrix(&[vec![0.5]]);
    let asym1 = costs(&[vec![0.0, 0.0005], vec![0.002, 0.0]]);
    vec![
        ("1d-standard", standard_1d(n1)),
        ("1d-asymmetric", CorrectorProblem::with_auto_radius(one.clone(), one.clone(), asym1, n1).unwrap()),
        ("1d-slow-diffusion", CorrectorProblem::with_auto_radius(one.clone(), half, costs(&[vec![0.0, 0.003], vec![0.003, 0.0]]), n1).unwrap()),
        ("2d-uncorrelated", two_asset(sigma_uncorrelated(), cash_only(0.001, 0.001), n2)),
        ("2d-positive", two_asset(sigma_sym(-0.25), cash_only(0.001, 0.001), n2)),
        ("2d-negative", two_asset(sigma_sym(0.25), cash_only(0.001, 0.001), n2)),
        ("2d-skew-negative", two_asset(matrix(&[vec![1.0, -0.25], vec![-0.1, 1.0]]), cash_only(0.001, 0.001), n2)),
        ("2d-skew-positive", two_asset(matrix(&[vec![1.0, 0.25], vec![0.1, 1.0]]), cash_only(0.001, 0.001), n2)),
        ("2d-unequal-cash", two_asset(sigma_uncorrelated(), cash_only(0.001, 0.002), n2)),
        ("2d-all-transfers", two_asset(sigma_uncorrelated(), all_transfers(0.001), n2)),
        ("2d-all-transfers-correlated", two_asset(sigma_sym(-0.25), all_transfers(0.001), n2)),
        (
            "2d-asymmetric-cash",
            two_asset(
                sigma_uncorrelated(),
                costs(&[vec![0.0, 0.001, 0.0005], vec![0.002, 0.0, INF], vec![0.001, INF, 0.0]]),
                n2,
            ),
        ),
    ]
}

/// `A u = beta u - 1/2 |sigma^T y|^2 u_zz - (r z + y.(mu - r) - c) u_z` by
/// central differences.
pub fn apply_second_corrector_operator(sol: &MertonSolution<f64>, params: &MarketParams<f64>, u0: f64, z: f64) -> f64 {
    let u = |x: f64| u0 * x.powf(sol.p);
    let h = 1e-3 * z;
    let uz = (u(z + h) - u(z - h)) / (2.0 * h);
    let uzz = (u(z + h) - 2.0 * u(z) + u(z - h)) / (h * h);
    let y: Vec<f64> = sol.pi.iter().map(|x| x * z).collect();
    let st = params.sigma.transpose().mul_vec(&y);
    let quad: f64 = st.iter().map(|x| x * x).sum::<f64>() / 2.0;
    let drift = params.r * z + y.iter().zip(params.excess_return()).map(|(a, b)| a * b).sum::<f64>() - sol.consumption(z);
    params.beta * u(z) - quad * uzz - drift * uz
}


pub fn market_1d() -> MarketParams<f64> {
    MarketParams::new(vec![0.08], 0.03, matrix(&[vec![0.2]]), 0.1, 0.5, costs(&[vec![0.0, 0.001], vec![0.001, 0.0]]), 0.1)
        .unwrap()
}

pub fn market_2d() -> MarketParams<f64> {
    MarketParams::new(
        vec![0.07, 0.05],
        0.02,
        matrix(&[vec![0.25, 0.05], vec![-0.03, 0.2]]),
        0.08,
        0.3,
        cash_only(0.001, 0.002),
        0.05,
    )
    .unwrap()
}
