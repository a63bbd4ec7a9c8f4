//! Small dense real matrices: products, exponentials and rank-revealing solves.
//!
//! Sizes here never exceed 4, so everything is stack allocated and written
//! out with plain loops.

use core::ops::{Add, Index, IndexMut, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareMatrix<const N: usize>(pub [[f64; N]; N]);

pub type Mat3 = SquareMatrix<3>;

impl<const N: usize> SquareMatrix<N> {
    pub const fn zero() -> Self {
        Self([[0.0; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn apply(&self, v: &[f64; N]) -> [f64; N] {
        let mut out = [0.0; N];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor
    /// series. The scaled argument has norm at most 1/2, where 24 terms
    /// leave a remainder far below one ulp.
    pub fn exp(&self) -> Self {
        let norm = self.norm_inf();
        let mut squarings = 0u32;
        let mut scaled_norm = norm;
        while scaled_norm > 0.5 {
            scaled_norm *= 0.5;
            squarings += 1;
        }
        let a = self.scale(libm::ldexp(1.0, -(squarings as i32)));
        let mut term = Self::identity();
        let mut sum = Self::identity();
        for k in 1..=24 {
            term = (term * a).scale(1.0 / k as f64);
            sum = sum + term;
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl<const N: usize> Default for SquareMatrix<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> Index<(usize, usize)> for SquareMatrix<N> {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for SquareMatrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for SquareMatrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for SquareMatrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for SquareMatrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..N {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

/// Outcome of solving `A x = b` for a 3x3 system.
#[derive(Debug, Clone, PartialEq)]
pub enum Solve3 {
    Unique([f64; 3]),
    /// `A` is rank deficient; `kernel` spans its null space.
    Singular {
        kernel: alloc::vec::Vec<[f64; 3]>,
    },
}

/// Gaussian elimination with full pivoting. A pivot smaller than
/// `rel_tol * max|A|` counts as zero.
pub fn solve3(a: &Mat3, b: &[f64; 3], rel_tol: f64) -> Solve3 {
    let scale = a.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut m = a.0;
    let mut rhs = *b;
    let mut cols = [0usize, 1, 2];
    let mut rank = 0;
    for step in 0..3 {
        let (mut pi, mut pj, mut best) = (step, step, 0.0);
        for i in step..3 {
            for j in step..3 {
                if m[i][j].abs() > best {
                    best = m[i][j].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= tol {
            break;
        }
        m.swap(step, pi);
        rhs.swap(step, pi);
        for row in m.iter_mut() {
            row.swap(step, pj);
        }
        cols.swap(step, pj);
        for i in step + 1..3 {
            let f = m[i][step] / m[step][step];
            for j in step..3 {
                m[i][j] -= f * m[step][j];
            }
            rhs[i] -= f * rhs[step];
        }
        rank += 1;
    }

    if rank == 3 {
        let mut y = [0.0; 3];
        for i in (0..3).rev() {
            let mut s = rhs[i];
            for j in i + 1..3 {
                s -= m[i][j] * y[j];
            }
            y[i] = s / m[i][i];
        }
        let mut x = [0.0; 3];
        for (k, &c) in cols.iter().enumerate() {
            x[c] = y[k];
        }
        return Solve3::Unique(x);
    }

    // Free variables are the permuted columns rank..3.
    let mut kernel = alloc::vec::Vec::new();
    for free in rank..3 {
        let mut y = [0.0; 3];
        y[free] = 1.0;
        for i in (0..rank).rev() {
            let mut s = 0.0;
            for j in i + 1..3 {
                s -= m[i][j] * y[j];
            }
            y[i] = s / m[i][i];
        }
        let mut x = [0.0; 3];
        for (k, &c) in cols.iter().enumerate() {
            x[c] = y[k];
        }
        let n = libm::sqrt(x.iter().map(|v| v * v).sum());
        kernel.push([x[0] / n, x[1] / n, x[2] / n]);
    }
    Solve3::Singular { kernel }
}
