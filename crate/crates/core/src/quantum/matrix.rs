use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

/// First Pauli matrix `[[0, 1], [1, 0]]`.
pub const SIGMA_1: Matrix2 = Matrix2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);

/// Second Pauli matrix in this crate's convention, `[[0, i], [-i, 0]]`.
///
/// This is the negative of the textbook `sigma_y`.
pub const SIGMA_2: Matrix2 = Matrix2([[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]]);

/// Third Pauli matrix in this crate's convention, `diag(-1, 1)`.
///
/// This is the negative of the textbook `sigma_z`, so the first basis vector
/// sits at Bloch coordinate `x3 = -1`.
pub const SIGMA_3: Matrix2 = Matrix2([[c(-1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);

pub const PAULI: [Matrix2; 3] = [SIGMA_1, SIGMA_2, SIGMA_3];

impl Matrix2 {
    pub const ZERO: Matrix2 = Matrix2([[c(0.0, 0.0); 2]; 2]);
    pub const IDENTITY: Matrix2 = Matrix2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub fn from_real(a: [[f64; 2]; 2]) -> Self {
        Matrix2([
            [c(a[0][0], 0.0), c(a[0][1], 0.0)],
            [c(a[1][0], 0.0), c(a[1][1], 0.0)],
        ])
    }

    /// `(I * scalar + v . sigma)` under this crate's Pauli convention.
    pub fn from_pauli(scalar: f64, v: [f64; 3]) -> Self {
        let mut m = Self::IDENTITY * scalar;
        for (k, s) in PAULI.iter().enumerate() {
            m = m + *s * v[k];
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Matrix2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// Real coefficients `(a0, a)` with `self = a0 I + a . sigma`, assuming
    /// the matrix is hermitian.
    pub fn pauli_coefficients(&self) -> (f64, [f64; 3]) {
        let a0 = 0.5 * self.trace().re;
        let mut v = [0.0; 3];
        for (k, s) in PAULI.iter().enumerate() {
            v[k] = 0.5 * (*s * *self).trace().re;
        }
        (a0, v)
    }

    /// Eigenvalues `(low, high)` of a hermitian matrix, in closed form from
    /// the mean diagonal and the half gap.
    pub fn hermitian_eigenvalues(&self) -> Result<(f64, f64)> {
        let defect = self.hermiticity_defect();
        if defect > 1e-12 * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: defect });
        }
        Ok(self.hermitian_eigenvalues_unchecked())
    }

    pub(crate) fn hermitian_eigenvalues_unchecked(&self) -> (f64, f64) {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        let mean = 0.5 * (a + d);
        let half_gap = libm::hypot(0.5 * (a - d), b.norm());
        (mean - half_gap, mean + half_gap)
    }
}

impl Add for Matrix2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Matrix2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl Neg for Matrix2 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul for Matrix2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        Matrix2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<f64> for Matrix2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let mut out = self;
        for z in out.0.iter_mut().flatten() {
            *z *= s;
        }
        out
    }
}

impl Mul<Complex64> for Matrix2 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        let mut out = self;
        for z in out.0.iter_mut().flatten() {
            *z *= s;
        }
        out
    }
}
