//! Closed-form solutions of the preset master equations in Bloch coordinates.
//!
//! These are written from the Bloch equations of each preset directly and do
//! not go through [`LindbladModel`](super::LindbladModel), so they serve as an
//! independent check on the generator and the integrator.

use super::model::{BlochGenerator, ModelPreset};
use crate::error::Result;
use crate::linalg::SquareMatrix;
use crate::quantum::{BlochVector, DensityMatrix};

/// Bloch equations of a preset, as derived by hand.
pub fn preset_bloch_generator(preset: &ModelPreset) -> Result<BlochGenerator> {
    preset.validate()?;
    Ok(match *preset {
        ModelPreset::Tetrahedron { kappa, alpha, omega } => {
            let d = 4.0 / 3.0 * kappa * alpha * alpha;
            BlochGenerator {
                drift: SquareMatrix([[-d, -omega, 0.0], [omega, -d, 0.0], [0.0, 0.0, -d]]),
                offset: [0.0; 3],
            }
        }
        ModelPreset::Zeno { kappa, omega } => BlochGenerator {
            drift: SquareMatrix([[0.0, -omega, 0.0], [omega, -0.5 * kappa, 0.0], [0.0, 0.0, -0.5 * kappa]]),
            offset: [0.0; 3],
        },
        ModelPreset::Fluorescence { rabi, gamma } => BlochGenerator {
            drift: SquareMatrix([[-0.5 * gamma, 0.0, 0.0], [0.0, -0.5 * gamma, rabi], [0.0, -rabi, -gamma]]),
            offset: [0.0, 0.0, gamma],
        },
        ModelPreset::SigmaXConjugation => BlochGenerator {
            drift: SquareMatrix([[0.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, -2.0]]),
            offset: [0.0; 3],
        },
    })
}

/// Bloch vector at time `t`.
///
/// Tetrahedron: rotation about the z axis by `omega t` times the isotropic
/// decay `exp(-(4/3) kappa alpha^2 t)`. SigmaXConjugation:
/// `(x1, x2 e^{-2t}, x3 e^{-2t})`. Zeno and Fluorescence: exponential of the
/// affine 3x3 Bloch system.
pub fn analytic_bloch(preset: &ModelPreset, x0: &BlochVector, t: f64) -> Result<BlochVector> {
    preset.validate()?;
    let [c1, c2, c3] = x0.0;
    Ok(match *preset {
        ModelPreset::Tetrahedron { kappa, alpha, omega } => {
            let decay = libm::exp(-4.0 / 3.0 * kappa * alpha * alpha * t);
            let (s, c) = (libm::sin(omega * t), libm::cos(omega * t));
            BlochVector([(-c2 * s + c1 * c) * decay, (c1 * s + c2 * c) * decay, c3 * decay])
        }
        ModelPreset::SigmaXConjugation => {
            let decay = libm::exp(-2.0 * t);
            BlochVector([c1, c2 * decay, c3 * decay])
        }
        ModelPreset::Zeno { .. } | ModelPreset::Fluorescence { .. } => {
            let flow = preset_bloch_generator(preset)?.flow(t);
            BlochVector(flow.apply(&x0.0))
        }
    })
}

pub fn analytic_evolve(preset: &ModelPreset, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(analytic_bloch(preset, &rho0.to_bloch(), t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_model, evolve, stationary_state};

    const PRESETS: [ModelPreset; 4] = [
        ModelPreset::Tetrahedron { kappa: 1.0, alpha: 0.8, omega: 1.0 },
        ModelPreset::Zeno { kappa: 1.5, omega: 1.0 },
        ModelPreset::Fluorescence { rabi: 1.0, gamma: 1.0 },
        ModelPreset::SigmaXConjugation,
    ];

    #[test]
    fn hand_derived_equations_match_the_generator() {
        for p in PRESETS {
            let from_model = build_model(&p).unwrap().bloch_generator();
            let by_hand = preset_bloch_generator(&p).unwrap();
            assert!((from_model.drift - by_hand.drift).norm_inf() < 1e-14, "{p:?}");
            for k in 0..3 {
                assert!((from_model.offset[k] - by_hand.offset[k]).abs() < 1e-14, "{p:?}");
            }
        }
    }

    #[test]
    fn tetrahedron_m3_decay() {
        let p = ModelPreset::Tetrahedron { kappa: 1.0, alpha: 1.0, omega: 0.7 };
        for t in [0.0, 0.5, 1.0, 3.0] {
            let x = analytic_bloch(&p, &BlochVector::new(0.0, 0.0, 1.0), t).unwrap();
            assert!((x.0[2] - libm::exp(-4.0 * t / 3.0)).abs() < 1e-15);
            assert!((x.norm() - libm::exp(-4.0 * t / 3.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_x_tends_to_mixed_state_from_e1() {
        let e1 = DensityMatrix::from_bloch(BlochVector::new(0.0, 0.0, -1.0)).unwrap();
        let rho = analytic_evolve(&ModelPreset::SigmaXConjugation, &e1, 30.0).unwrap();
        assert!(rho.to_bloch().norm() < 1e-25);
    }

    #[test]
    fn fluorescence_relaxes_to_stationary_state() {
        let p = ModelPreset::Fluorescence { rabi: 1.0, gamma: 1.0 };
        let ground = DensityMatrix::from_bloch(BlochVector::new(0.0, 0.0, 1.0)).unwrap();
        let late = analytic_evolve(&p, &ground, 80.0).unwrap().to_bloch();
        let rho0 = stationary_state(&build_model(&p).unwrap()).unwrap().to_bloch();
        assert!(late.sub(&rho0).norm() < 1e-8);
    }

    #[test]
    fn integrator_agrees_with_closed_forms() {
        let x0 = BlochVector::new(0.48, -0.6, 0.64);
        let rho0 = DensityMatrix::from_bloch(x0).unwrap();
        for p in PRESETS {
            let model = build_model(&p).unwrap();
            let traj = evolve(&model, &rho0, 5.0, model.default_step()).unwrap();
            let mut worst: f64 = 0.0;
            for (t, rho) in traj.times.iter().zip(&traj.states) {
                let exact = analytic_bloch(&p, &x0, *t).unwrap();
                worst = worst.max(rho.to_bloch().sub(&exact).norm());
            }
            assert!(worst < 1e-8, "{p:?}: {worst:e}");
        }
    }
}
