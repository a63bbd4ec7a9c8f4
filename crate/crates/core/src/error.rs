use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the qmix-core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("Bloch vector has norm {norm}, outside the unit ball")]
    OutsideBlochBall { norm: f64 },

    #[error("matrix is not hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("parameter `{name}` = {value} out of range: {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("operation not supported for preset {0}")]
    UnsupportedPreset(&'static str),

    #[error("stationary state is not unique; fixed Bloch directions {kernel:?}")]
    NonUniqueStationaryState { kernel: Vec<[f64; 3]> },

    #[error("positivity lost at t = {time}: smallest eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { time: f64, min_eigenvalue: f64 },

    #[error("distance for probe {probe} fell to {distance:e} at t = {time}, below the floor {floor:e}")]
    DistanceUnderflow {
        probe: usize,
        time: f64,
        distance: f64,
        floor: f64,
    },

    #[error("probe {index} coincides with the reference state")]
    ProbeEqualsReference { index: usize },

    #[error("no usable probes: {0}")]
    NoUsableProbes(String),

    #[error("jump denominator {denominator:e} is singular for detector {detector}")]
    SingularJump { detector: u8, denominator: f64 },

    #[error("point {index} lies {deviation:e} away from the unit sphere")]
    OffSphere { index: usize, deviation: f64 },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("only {usable} usable levels in the fit range (need at least 3); use more points or fewer levels")]
    InsufficientLevels { usable: usize },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("grid size {cells} is not divisible by r = {r}")]
    GridNotDivisible { cells: usize, r: u32 },

    #[error("Fourier index {index} exceeds the alias limit {limit}")]
    AliasLimit { index: u64, limit: u64 },

    #[error("densities use incompatible representations")]
    IncompatibleRepresentations,

    #[error("not enough samples for a fit: {0}")]
    TooFewSamples(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
