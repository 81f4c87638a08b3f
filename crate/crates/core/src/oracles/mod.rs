//! Independent ground truth for the grid solver.

mod mc;
mod one_dim;
mod separable;
mod support;

pub use mc::{mc_ergodic_cost, McOptions, McEstimate};
pub use one_dim::{solve_1d_closed_form, OneDimSolution};
pub use separable::{separable_from_problem, separable_solution, SeparableSolution};
pub use support::delta_c;
