use super::model::LindbladModel;
use crate::error::{Error, Result};
use crate::linalg::{solve3, Solve3};
use crate::quantum::{BlochVector, DensityMatrix};

/// Relative pivot threshold below which the Bloch drift counts as singular.
const KERNEL_TOL: f64 = 1e-10;

/// The unique state with `L(rho) = 0`, found by solving `M x = -b` in Bloch
/// coordinates. A rank-deficient drift is reported together with the fixed
/// directions.
pub fn stationary_state(model: &LindbladModel) -> Result<DensityMatrix> {
    let g = model.bloch_generator();
    let rhs = [-g.offset[0], -g.offset[1], -g.offset[2]];
    match solve3(&g.drift, &rhs, KERNEL_TOL) {
        Solve3::Unique(mut x) => {
            // One step of iterative refinement.
            let r = g.drift.apply(&x);
            let resid = [rhs[0] - r[0], rhs[1] - r[1], rhs[2] - r[2]];
            if let Solve3::Unique(dx) = solve3(&g.drift, &resid, KERNEL_TOL) {
                for k in 0..3 {
                    x[k] += dx[k];
                }
            }
            DensityMatrix::from_bloch(BlochVector(x))
        }
        Solve3::Singular { kernel } => Err(Error::NonUniqueStationaryState { kernel }),
    }
}

/// Stationary Bloch vector of the driven atom next to the closed-form values
/// printed for it, `n2 = 2 W g / (4 W^2 + g^2)`, `n3 = -g^2 / (4 W^2 + g^2)`
/// (with the lowercase frequency in the printed `n2` read as the Rabi
/// frequency `W`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluorescenceComparison {
    /// Kernel of the generator, `(x1, x2, x3)`.
    pub kernel: BlochVector,
    /// `(n2, n3)` as printed, in this crate's Pauli convention.
    pub printed: (f64, f64),
    /// `(n2, n3)` as printed but read in the textbook convention, which in
    /// this crate's convention flips both signs.
    pub printed_textbook_convention: (f64, f64),
    /// `(x2, x3)` in closed form from the Bloch equations:
    /// `(2 W g, g^2) / (2 W^2 + g^2)`.
    pub derived: (f64, f64),
}

impl FluorescenceComparison {
    pub fn new(model: &LindbladModel, rabi: f64, gamma: f64) -> Result<Self> {
        let kernel = stationary_state(model)?.to_bloch();
        let den4 = 4.0 * rabi * rabi + gamma * gamma;
        let den2 = 2.0 * rabi * rabi + gamma * gamma;
        let printed = (2.0 * rabi * gamma / den4, -gamma * gamma / den4);
        Ok(FluorescenceComparison {
            kernel,
            printed,
            printed_textbook_convention: (-printed.0, -printed.1),
            derived: (2.0 * rabi * gamma / den2, gamma * gamma / den2),
        })
    }

    /// Largest component mismatch between the kernel and a `(n2, n3)` pair.
    pub fn mismatch(&self, pair: (f64, f64)) -> f64 {
        let x = &self.kernel.0;
        x[0].abs().max((x[1] - pair.0).abs()).max((x[2] - pair.1).abs())
    }
}
