use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("surface too large: max|eta| = {max_eta:.3e} must stay below b/2 = {limit:.3e}")]
    SurfaceTooLarge { max_eta: f64, limit: f64 },
    #[error("boundary matrix numerically singular at |xi| = {xi_abs:.4e} (condition {cond:.3e})")]
    NumericallySingular { xi_abs: f64, cond: f64 },
    #[error("collocation system ill-conditioned (condition estimate {cond:.3e})")]
    IllConditionedCollocation { cond: f64 },
    #[error("rho vanishes at xi = ({}, {})", .xi[0], .xi[1])]
    RhoVanishing { xi: [f64; 2] },
    #[error("fiber Gram matrix is degenerate; refine the vertical grid")]
    DegenerateGram,
    #[error("extrapolation did not settle: successive estimates {0:?}")]
    NonConvergent(Vec<f64>),
    #[error("round-trip misfit {0:.3e} exceeds tolerance")]
    ResidualTooLarge(f64),
    #[error("iteration diverged at step {iteration} (contraction factor {factor:.3})")]
    Diverged { iteration: usize, factor: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("sample point ({x:?}, {y}) lies outside the fluid (surface at {surface})")]
    PointOutsideDomain { x: [f64; 2], y: f64, surface: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
