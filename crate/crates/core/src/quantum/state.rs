use alloc::format;

use super::matrix::{Matrix2, PAULI};
use crate::error::{Error, Result};

/// Structural tolerance for hermiticity, trace and eigenvalue checks.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Bloch vectors longer than `1 + BLOCH_REJECT_TOL` are rejected.
pub const BLOCH_REJECT_TOL: f64 = 1e-9;

/// Real 3-vector `x` with `rho = (I + x . sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector([0.0; 3]);

    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        BlochVector([x1, x2, x3])
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        BlochVector([self.0[0] - other.0[0], self.0[1] - other.0[1], self.0[2] - other.0[2]])
    }

    pub fn scale(&self, s: f64) -> Self {
        BlochVector([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(v: [f64; 3]) -> Self {
        BlochVector(v)
    }
}

/// A 2x2 density matrix: hermitian, positive, unit trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix2);

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity at [`STRUCTURAL_TOL`].
    pub fn new(m: Matrix2) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("hermiticity defect {defect:e}")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STRUCTURAL_TOL || tr.im.abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (lo, _) = m.hermitian_eigenvalues_unchecked();
        if lo < -STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(DensityMatrix(m))
    }

    /// The maximally mixed state `I / 2`.
    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix2::IDENTITY * 0.5)
    }

    /// `(I + x . sigma) / 2`. Vectors with `|x| > 1 + 1e-9` are rejected;
    /// lengths in `(1, 1 + 1e-9]` are pulled back onto the sphere.
    pub fn from_bloch(x: BlochVector) -> Result<Self> {
        let n = x.norm();
        if !n.is_finite() || n > 1.0 + BLOCH_REJECT_TOL {
            return Err(Error::OutsideBlochBall { norm: n });
        }
        let x = if n > 1.0 { x.scale(1.0 / n) } else { x };
        Ok(Self::from_bloch_unchecked(x))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix2) -> Self {
        DensityMatrix(m)
    }

    pub(crate) fn from_bloch_unchecked(x: BlochVector) -> Self {
        DensityMatrix(Matrix2::from_pauli(0.5, [0.5 * x.0[0], 0.5 * x.0[1], 0.5 * x.0[2]]))
    }

    /// Bloch coordinates `x_k = tr(rho sigma_k)`.
    pub fn to_bloch(&self) -> BlochVector {
        let mut x = [0.0; 3];
        for (k, s) in PAULI.iter().enumerate() {
            x[k] = (self.0 * *s).trace().re;
        }
        BlochVector(x)
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    /// Eigenvalues `(low, high)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        self.0.hermitian_eigenvalues_unchecked()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

impl From<DensityMatrix> for Matrix2 {
    fn from(rho: DensityMatrix) -> Matrix2 {
        rho.0
    }
}
