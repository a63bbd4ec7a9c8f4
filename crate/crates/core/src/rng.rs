//! The pinned random source for every stochastic routine.
//!
//! Generator: xoshiro256++ seeded through `SeedableRng::seed_from_u64`
//! (SplitMix64 expansion of the 64-bit seed). Uniform variates on `[0, 1)` are
//! `(next_u64 >> 11) * 2^-53`. Any implementation reproducing these two rules
//! reproduces sample paths bit for bit.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct PathRng(Xoshiro256PlusPlus);

impl PathRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        PathRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential waiting time with the given rate, by inversion.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -libm::log(1.0 - self.uniform()) / rate
    }

    /// Uniform point on the unit sphere (`z` uniform, azimuth uniform).
    pub fn unit_vector(&mut self) -> [f64; 3] {
        let z = 2.0 * self.uniform() - 1.0;
        let phi = 2.0 * core::f64::consts::PI * self.uniform();
        let rho = libm::sqrt((1.0 - z * z).max(0.0));
        [rho * libm::cos(phi), rho * libm::sin(phi), z]
    }
}
