//! Trace norm and entropy functionals on 2x2 states. Logarithms are natural.

use super::matrix::Matrix2;
use super::state::DensityMatrix;
use crate::error::Result;

/// Eigenvalues below this count as zero when deciding support inclusion.
pub const SUPPORT_TOL: f64 = 1e-12;

/// A relative entropy: finite, or `+inf` when the support condition fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyValue {
    Finite(f64),
    Infinite,
}

impl EntropyValue {
    pub fn value(self) -> f64 {
        match self {
            EntropyValue::Finite(v) => v,
            EntropyValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, EntropyValue::Finite(_))
    }
}

/// `tr|A|` for hermitian `A`.
pub fn trace_norm(a: &Matrix2) -> Result<f64> {
    let (lo, hi) = a.hermitian_eigenvalues()?;
    Ok(lo.abs() + hi.abs())
}

/// `x log x` with `0 log 0 = 0`.
pub(crate) fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * libm::log(x)
    }
}

/// `-sum lambda log lambda` over the eigenvalues of `rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (lo, hi) = rho.eigenvalues();
    -(xlogx(lo.max(0.0)) + xlogx(hi.max(0.0)))
}

/// `H(rho | sigma) = tr(rho log rho - rho log sigma)`.
///
/// `log sigma` is applied through the spectral projectors of `sigma`, which
/// for a qubit are `(I +- s_hat . sigma) / 2` with eigenvalues `(1 +- |s|) / 2`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> EntropyValue {
    let x = rho.to_bloch();
    let s = sigma.to_bloch();
    let r = s.norm();

    let rho_log_rho = -von_neumann_entropy(rho);

    // (eigenvalue of sigma, weight of rho on that eigenspace)
    let spectrum: [(f64, f64); 2] = if r < 1e-300 {
        [(0.5, 1.0), (0.5, 0.0)]
    } else {
        let along = x.dot(&s) / r;
        [
            (0.5 * (1.0 + r), 0.5 * (1.0 + along)),
            (0.5 * (1.0 - r).max(0.0), 0.5 * (1.0 - along)),
        ]
    };

    let mut rho_log_sigma = 0.0;
    for (mu, w) in spectrum {
        if w <= SUPPORT_TOL {
            continue;
        }
        if mu < SUPPORT_TOL {
            return EntropyValue::Infinite;
        }
        rho_log_sigma += w * libm::log(mu);
    }
    EntropyValue::Finite((rho_log_rho - rho_log_sigma).max(0.0))
}
