//! Per-frequency ODE machinery.

pub mod bvp;
pub mod expm;
pub mod symbol;
pub mod system;

pub use bvp::{
    gauss_legendre, solve_forced_bvp, solve_transverse, Backend, BvpData, BvpSpec, CollocationSolver, ForcedSolver,
    MatexpPropagator, Profile, SolveOptions, TransverseSolver, V6,
};
pub use expm::{matrix_exponential, M6};
pub use symbol::{solve_symbol, solve_symbol_with, SymbolEntry, SymbolTable};
pub use system::{assemble_b, assemble_boundary, assemble_bulk_matrix, boundary_blocks, BoundaryOperator, Coupling};
