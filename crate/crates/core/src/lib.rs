//! Ergodic first-corrector solver for small transaction costs in a
//! multi-asset Merton portfolio problem.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below fix the precision.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod corrector;
pub mod error;
pub mod grid;
pub mod invariants;
pub mod linalg;
pub mod market;
pub mod oracles;
pub mod regions;
pub mod scalar;

pub use corrector::{
    default_radius, discounted_bounds, solve_discounted, solve_policy_iteration, Action, Backend, CorrectorProblem,
    CorrectorSolution, CostConvention, DiscountedSolution, PolicyField, SolverOptions,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use invariants::{check_solution, InvariantCheck};
pub use linalg::Matrix;
pub use market::{
    expansion_value, map_nt_region, second_corrector_value, solve_merton, CostMatrix, MarketParams, MertonSolution,
};
pub use oracles::{delta_c, mc_ergodic_cost, solve_1d_closed_form, McEstimate, McOptions, OneDimSolution};
pub use regions::{classify_regions, emit_csv, emit_image, label_regions, PairSet, RegionMap};
pub use scalar::Scalar;

pub type Matrix64 = Matrix<f64>;
pub type CostMatrix64 = CostMatrix<f64>;
pub type MarketParams64 = MarketParams<f64>;
pub type MertonSolution64 = MertonSolution<f64>;
pub type CorrectorProblem64 = CorrectorProblem<f64>;
pub type CorrectorSolution64 = CorrectorSolution<f64>;
pub type SolverOptions64 = SolverOptions<f64>;
pub type RegionMap64 = RegionMap<f64>;

pub type Matrix32 = Matrix<f32>;
pub type CostMatrix32 = CostMatrix<f32>;
pub type MarketParams32 = MarketParams<f32>;
pub type CorrectorProblem32 = CorrectorProblem<f32>;
pub type CorrectorSolution32 = CorrectorSolution<f32>;
pub type SolverOptions32 = SolverOptions<f32>;
