//! Full nonlinear residual, the Picard solve and Eulerian sampling.

mod eulerian;
mod forcing;
mod picard;
mod residual;

pub use eulerian::{pushforward_eulerian, sample_grid, write_samples_csv, EulerianSample};
pub use forcing::{ForcingData, ForcingPreset, Pattern, Vertical};
pub use picard::{default_delta, picard_solve, solve_traveling_wave, PicardOptions, SolveStatus, SolveTrace};
pub use residual::{nonlinear_residual, ResidualDiagnostics, ALIAS_WARN};
