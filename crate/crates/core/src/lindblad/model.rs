use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Mat3, SquareMatrix};
use crate::quantum::{DensityMatrix, Matrix2, PAULI, SIGMA_1, SIGMA_3};
use crate::tetrahedron;

/// The four dynamics studied in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelPreset {
    /// `H = (omega/2) sigma_3`, four detectors `a_i = (I + alpha n_i . sigma) / 2`
    /// at the tetrahedron vertices, each coupled with rate `kappa`.
    Tetrahedron { kappa: f64, alpha: f64, omega: f64 },
    /// `H = (omega/2) sigma_3`, one projector `e = (I + sigma_1) / 2` at rate `kappa`.
    Zeno { kappa: f64, omega: f64 },
    /// Driven two-level atom: `H = -(rabi/2) sigma_1`, decay `A = [[0,0],[1,0]]`
    /// at rate `gamma`.
    Fluorescence { rabi: f64, gamma: f64 },
    /// `d rho/dt = sigma_1 rho sigma_1 - rho`: dissipative but not mixing.
    SigmaXConjugation,
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected: "finite and >= 0",
        })
    }
}

impl ModelPreset {
    pub fn name(&self) -> &'static str {
        match self {
            ModelPreset::Tetrahedron { .. } => "tetrahedron",
            ModelPreset::Zeno { .. } => "zeno",
            ModelPreset::Fluorescence { .. } => "fluorescence",
            ModelPreset::SigmaXConjugation => "sigma-x-conjugation",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelPreset::Tetrahedron { kappa, alpha, omega } => {
                non_negative("kappa", kappa)?;
                non_negative("omega", omega)?;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::InvalidParameter {
                        name: "alpha",
                        value: alpha,
                        expected: "in [0, 1]",
                    });
                }
                Ok(())
            }
            ModelPreset::Zeno { kappa, omega } => {
                non_negative("kappa", kappa)?;
                non_negative("omega", omega)
            }
            ModelPreset::Fluorescence { rabi, gamma } => {
                non_negative("rabi", rabi)?;
                non_negative("gamma", gamma)
            }
            ModelPreset::SigmaXConjugation => Ok(()),
        }
    }
}

/// One dissipative channel `rate * (g rho g^+ - {g^+ g, rho} / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpTerm {
    pub operator: Matrix2,
    pub rate: f64,
}

/// A Lindblad generator on 2x2 matrices:
/// `L(rho) = -i[H, rho] + sum_j rate_j (g_j rho g_j^+ - {g_j^+ g_j, rho} / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: Matrix2,
    jumps: Vec<JumpTerm>,
    /// `sum_j rate_j g_j^+ g_j`
    lambda: Matrix2,
}

impl LindbladModel {
    pub fn new(hamiltonian: Matrix2, jumps: Vec<JumpTerm>) -> Result<Self> {
        let defect = hamiltonian.hermiticity_defect();
        if defect > 1e-12 * hamiltonian.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let mut lambda = Matrix2::ZERO;
        for j in &jumps {
            non_negative("rate", j.rate)?;
            lambda = lambda + j.operator.adjoint() * j.operator * j.rate;
        }
        Ok(LindbladModel {
            hamiltonian,
            jumps,
            lambda,
        })
    }

    pub fn hamiltonian(&self) -> &Matrix2 {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpTerm] {
        &self.jumps
    }

    /// Applies the generator to an arbitrary 2x2 matrix (it is linear).
    pub fn apply(&self, m: &Matrix2) -> Matrix2 {
        let minus_i = Complex64::new(0.0, -1.0);
        let mut out = self.hamiltonian.commutator(m) * minus_i;
        for j in &self.jumps {
            out = out + j.operator * *m * j.operator.adjoint() * j.rate;
        }
        out - self.lambda.anticommutator(m) * 0.5
    }

    /// `L(rho)`: traceless and hermitian for a density matrix input.
    pub fn generator_apply(&self, rho: &DensityMatrix) -> Matrix2 {
        self.apply(rho.matrix())
    }

    /// Affine form of the generator in Bloch coordinates, `dx/dt = M x + b`.
    pub fn bloch_generator(&self) -> BlochGenerator {
        let centre = self.apply(&(Matrix2::IDENTITY * 0.5));
        let mut offset = [0.0; 3];
        for (k, s) in PAULI.iter().enumerate() {
            offset[k] = (*s * centre).trace().re;
        }
        let mut drift = Mat3::zero();
        for (j, sj) in PAULI.iter().enumerate() {
            let image = self.apply(&(*sj * 0.5));
            for (k, sk) in PAULI.iter().enumerate() {
                drift[(k, j)] = (*sk * image).trace().re;
            }
        }
        BlochGenerator { drift, offset }
    }

    /// Fastest time scale of the model: the Hamiltonian gap or the largest
    /// dissipative rate, whichever is larger.
    pub fn max_frequency(&self) -> f64 {
        let (lo, hi) = self.hamiltonian.hermitian_eigenvalues_unchecked();
        let mut f = hi - lo;
        for j in &self.jumps {
            let (_, top) = (j.operator.adjoint() * j.operator).hermitian_eigenvalues_unchecked();
            f = f.max(j.rate * top);
        }
        let (_, top) = self.lambda.hermitian_eigenvalues_unchecked();
        f.max(top)
    }

    /// `min(1e-3, 0.01 / max_frequency)`.
    pub fn default_step(&self) -> f64 {
        let f = self.max_frequency();
        if f > 0.0 {
            (0.01 / f).min(1e-3)
        } else {
            1e-3
        }
    }
}

/// `dx/dt = drift . x + offset` for the Bloch vector `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGenerator {
    pub drift: Mat3,
    pub offset: [f64; 3],
}

/// The exact time-`t` flow of a [`BlochGenerator`]: `x -> linear . x + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochFlow {
    pub linear: Mat3,
    pub shift: [f64; 3],
}

impl BlochFlow {
    pub fn apply(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut y = self.linear.apply(x);
        for k in 0..3 {
            y[k] += self.shift[k];
        }
        y
    }
}

impl BlochGenerator {
    /// Exponentiates the augmented 4x4 generator `[[M, b], [0, 0]]`, which
    /// handles singular drift matrices without special cases.
    pub fn flow(&self, t: f64) -> BlochFlow {
        let mut aug = SquareMatrix::<4>::zero();
        for i in 0..3 {
            for j in 0..3 {
                aug[(i, j)] = self.drift[(i, j)] * t;
            }
            aug[(i, 3)] = self.offset[i] * t;
        }
        let e = aug.exp();
        let mut linear = Mat3::zero();
        let mut shift = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                linear[(i, j)] = e[(i, j)];
            }
            shift[i] = e[(i, 3)];
        }
        BlochFlow { linear, shift }
    }
}

/// `a_i = (I + alpha n_i . sigma) / 2`.
pub fn detector_operator(direction: &[f64; 3], alpha: f64) -> Matrix2 {
    Matrix2::from_pauli(0.5, [0.5 * alpha * direction[0], 0.5 * alpha * direction[1], 0.5 * alpha * direction[2]])
}

pub fn build_model(preset: &ModelPreset) -> Result<LindbladModel> {
    preset.validate()?;
    match *preset {
        ModelPreset::Tetrahedron { kappa, alpha, omega } => {
            let jumps = tetrahedron::directions()
                .iter()
                .map(|n| JumpTerm {
                    operator: detector_operator(n, alpha),
                    rate: kappa,
                })
                .collect();
            LindbladModel::new(SIGMA_3 * (0.5 * omega), jumps)
        }
        ModelPreset::Zeno { kappa, omega } => {
            let e = (Matrix2::IDENTITY + SIGMA_1) * 0.5;
            LindbladModel::new(
                SIGMA_3 * (0.5 * omega),
                alloc::vec![JumpTerm {
                    operator: e,
                    rate: kappa
                }],
            )
        }
        ModelPreset::Fluorescence { rabi, gamma } => {
            let a = Matrix2::from_real([[0.0, 0.0], [1.0, 0.0]]);
            LindbladModel::new(
                SIGMA_1 * (-0.5 * rabi),
                alloc::vec![JumpTerm {
                    operator: a,
                    rate: gamma
                }],
            )
        }
        ModelPreset::SigmaXConjugation => LindbladModel::new(
            Matrix2::ZERO,
            alloc::vec![JumpTerm {
                operator: SIGMA_1,
                rate: 1.0
            }],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::BlochVector;

    fn random_states() -> Vec<DensityMatrix> {
        let mut rng = crate::rng::PathRng::seed_from_u64(11);
        (0..20)
            .map(|_| {
                let v = rng.unit_vector();
                let r = rng.uniform();
                DensityMatrix::from_bloch(BlochVector([v[0] * r, v[1] * r, v[2] * r])).unwrap()
            })
            .collect()
    }

    fn presets() -> [ModelPreset; 4] {
        [
            ModelPreset::Tetrahedron { kappa: 1.3, alpha: 0.7, omega: 0.9 },
            ModelPreset::Zeno { kappa: 2.0, omega: 1.1 },
            ModelPreset::Fluorescence { rabi: 1.5, gamma: 0.8 },
            ModelPreset::SigmaXConjugation,
        ]
    }

    #[test]
    fn generator_is_trace_free_and_hermitian() {
        for p in presets() {
            let model = build_model(&p).unwrap();
            for rho in random_states() {
                let l = model.generator_apply(&rho);
                assert!(l.trace().norm() < 1e-12, "{p:?}");
                assert!(l.hermiticity_defect() < 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn tetrahedron_detectors() {
        let n = tetrahedron::directions();
        assert_eq!(n[0], [1.0, 0.0, 0.0]);
        assert_eq!(n[1][0], -1.0 / 3.0);
        assert_eq!(n[1][1], 0.0);
        assert!((n[1][2] - 2.0 * libm::sqrt(2.0) / 3.0).abs() < 1e-16);

        // alpha = 1: projections
        for d in &n {
            let a = detector_operator(d, 1.0);
            assert!((a * a - a).max_abs() < 1e-15);
        }
        // sum_i a_i^2 = (1 + alpha^2) I for any alpha
        let alpha = 0.6;
        let mut sum = Matrix2::ZERO;
        for d in &n {
            let a = detector_operator(d, alpha);
            sum = sum + a * a;
        }
        assert!((sum - Matrix2::IDENTITY * (1.0 + alpha * alpha)).max_abs() < 1e-15);
    }

    #[test]
    fn tetrahedron_bloch_equations() {
        // dm1 = -w m2 - (4/3) k a^2 m1, dm2 = w m1 - (4/3) k a^2 m2, dm3 = -(4/3) k a^2 m3
        let (kappa, alpha, omega) = (1.3, 0.7, 0.9);
        let g = build_model(&ModelPreset::Tetrahedron { kappa, alpha, omega })
            .unwrap()
            .bloch_generator();
        let d = 4.0 / 3.0 * kappa * alpha * alpha;
        let expected = SquareMatrix([[-d, -omega, 0.0], [omega, -d, 0.0], [0.0, 0.0, -d]]);
        assert!((g.drift - expected).norm_inf() < 1e-14);
        assert!(g.offset.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zeno_bloch_equations() {
        // dx1 = -w x2, dx2 = w x1 - k/2 x2, dx3 = -k/2 x3
        let (kappa, omega) = (2.0, 1.1);
        let g = build_model(&ModelPreset::Zeno { kappa, omega }).unwrap().bloch_generator();
        let expected = SquareMatrix([[0.0, -omega, 0.0], [omega, -kappa / 2.0, 0.0], [0.0, 0.0, -kappa / 2.0]]);
        assert!((g.drift - expected).norm_inf() < 1e-14);
    }

    #[test]
    fn tetrahedron_mixed_state_is_stationary() {
        let model = build_model(&ModelPreset::Tetrahedron { kappa: 1.0, alpha: 0.4, omega: 2.0 }).unwrap();
        assert!(model.generator_apply(&DensityMatrix::maximally_mixed()).max_abs() < 1e-16);
    }

    #[test]
    fn sigma_x_fixes_its_axis() {
        let model = build_model(&ModelPreset::SigmaXConjugation).unwrap();
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.4, 0.0, 0.0)).unwrap();
        assert!(model.generator_apply(&rho).max_abs() < 1e-16);
    }

    #[test]
    fn closed_zeno_is_pure_commutator() {
        let model = build_model(&ModelPreset::Zeno { kappa: 0.0, omega: 1.7 }).unwrap();
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.3, -0.2, 0.5)).unwrap();
        let h = SIGMA_3 * 0.85;
        let expected = h.commutator(rho.matrix()) * Complex64::new(0.0, -1.0);
        assert!((model.generator_apply(&rho) - expected).max_abs() < 1e-16);
    }

    #[test]
    fn invalid_presets_rejected() {
        assert!(build_model(&ModelPreset::Tetrahedron { kappa: 1.0, alpha: 1.5, omega: 0.0 }).is_err());
        assert!(build_model(&ModelPreset::Zeno { kappa: -1.0, omega: 0.0 }).is_err());
        assert!(build_model(&ModelPreset::Fluorescence { rabi: f64::NAN, gamma: 1.0 }).is_err());
    }

    #[test]
    fn flow_matches_generator_for_small_times() {
        let g = build_model(&ModelPreset::Fluorescence { rabi: 1.0, gamma: 2.0 })
            .unwrap()
            .bloch_generator();
        let h = 1e-6;
        let f = g.flow(h);
        let x = [0.1, 0.2, -0.3];
        let y = f.apply(&x);
        let dx = g.drift.apply(&x);
        for k in 0..3 {
            let fd = (y[k] - x[k]) / h;
            assert!((fd - (dx[k] + g.offset[k])).abs() < 1e-5);
        }
    }
}
