//! Small dense complex linear algebra for density-operator simulation.

mod density;
mod matrix;
mod ops;

pub use density::{bell_vector, BellState, DensityMatrix};
pub use matrix::{ComplexMatrix, C_I, C_ONE, C_ZERO};
pub use ops::{
    apply_unitary, embed_operator, fidelity, partial_trace, partial_trace_matrix, tensor, Tensor,
};

/// Largest density-matrix dimension the simulator accepts.
pub const MAX_DIM: usize = 64;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;
