//! Lindblad generators for the preset qubit models, a fixed-step RK4
//! integrator, closed-form Bloch solutions and the stationary-state solver.

mod analytic;
mod integrate;
mod model;
mod stationary;

pub use analytic::{analytic_bloch, analytic_evolve, preset_bloch_generator};
pub use integrate::{evolve, evolve_with, propagate, EvolveOptions, StateTrajectory, POSITIVITY_ABORT, POSITIVITY_WARN};
pub use model::{build_model, detector_operator, BlochFlow, BlochGenerator, JumpTerm, LindbladModel, ModelPreset};
pub use stationary::{stationary_state, FluorescenceComparison};
