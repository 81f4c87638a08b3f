use thiserror::Error;

/// Errors raised by the market model, the corrector solvers and the oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("Merton value is infinite: discount rate {beta} must exceed p * growth rate {threshold}")]
    NonFiniteValue { beta: f64, threshold: f64 },
    #[error("sigma * sigma^T is not invertible")]
    SingularVolatility,
    #[error("effective diffusion is degenerate: smallest eigenvalue {min_eig:e} below floor {floor:e}")]
    DegenerateDiffusion { min_eig: f64, floor: f64 },
    #[error("second corrector operator is ill-posed: kappa2 = {0:e} <= 0")]
    IllPosedCorrector(f64),
    #[error("stencil of node {0} leaves the grid")]
    StencilOutOfDomain(usize),
    #[error("policy evaluation system is singular ({0})")]
    SingularSystem(String),
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("policy iteration did not converge in {0} iterations")]
    MaxItersExceeded(usize),
    #[error("domain too small: {0} nodes in the boundary band have no binding constraint; increase the radius")]
    DomainTooSmall(usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("separable solution inapplicable: {0}")]
    InapplicableStructure(String),
    #[error("support function is unbounded along the query direction")]
    UnboundedDirection,
    #[error("solution has no no-transaction node")]
    NoNTRegion,
    #[error("Monte-Carlo state escaped the grid {0} times")]
    NonConvergence(usize),
    #[error("no-transaction region is empty or does not contain the origin")]
    EmptyNTRegion,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
