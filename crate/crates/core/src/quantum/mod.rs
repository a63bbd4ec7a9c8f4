//! Two-level quantum states: exact 2x2 arithmetic, Bloch coordinates, trace
//! norm and entropies.
//!
//! The Pauli matrices follow the sign convention `sigma_2 = [[0, i], [-i, 0]]`,
//! `sigma_3 = diag(-1, 1)`. Every Bloch-space formula in the crate is written
//! against these constants.

pub mod entropy;
pub mod matrix;
pub mod state;

pub use entropy::{relative_entropy, trace_norm, von_neumann_entropy, EntropyValue};
pub use matrix::{Matrix2, PAULI, SIGMA_1, SIGMA_2, SIGMA_3};
pub use state::{BlochVector, DensityMatrix};
