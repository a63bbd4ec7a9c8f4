//! Mixing diagnostics for two-level open quantum systems.
//!
//! The crate covers Lindblad evolution of a qubit, quantum characteristic
//! exponents, the piecewise deterministic jump process generated by four
//! tetrahedral spin detectors (and the fractal attractors of its jump chain),
//! box-counting dimensions on the sphere, and the classical r-adic
//! Perron-Frobenius operator whose exponent the quantum one generalizes.
//!
//! Everything here is `no_std` with `alloc`; file formats, the command line
//! and parallel drivers live in the `qmix` crate.

#![no_std]
// NaN must fail range checks, and small fixed-size loops read better indexed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classical;
pub mod error;
pub mod exponent;
pub mod fit;
pub mod fractal;
pub mod lindblad;
pub mod linalg;
pub mod pdp;
pub mod quantum;
pub mod rng;
pub mod tetrahedron;

pub use error::{Error, Result};
