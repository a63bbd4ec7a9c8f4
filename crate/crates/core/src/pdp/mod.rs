//! The jump process of four tetrahedral spin detectors on pure states, and
//! its chaos-game attractors.

mod ifs;
mod path;

pub use ifs::{jump_map, jump_probs, Detector, PureSpinState, TetrahedronIfs, SINGULAR_DENOMINATOR, SPHERE_TOL};
pub use path::{
    chaos_game, ensemble_bloch, path_seed, sample_path, state_at_time, ChaosGame, JumpRateConvention, JumpRecord, PdpParams,
    SamplePath, CHAOS_GAME_START,
};
