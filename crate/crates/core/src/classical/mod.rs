//! Densities on the circle under the r-adic map `u -> r u mod 1`: the
//! Perron-Frobenius operator, L1 distances, entropies, the classical
//! exponent and the Fourier-coefficient identity `(P^n f)^(k) = f^(k r^n)`.

mod density;
mod lambda;

pub use density::{
    entropy, l1_distance, pf_apply, pf_iterate, relative_entropy_classical, AffineDensity, CircleDensity, GridDensity, RadicMap, MASS_TOL,
    SUPPORT_TOL,
};
pub use lambda::{fourier_check, lambda_classical, linear_probe, CONVERGED, PROBE_SEPARATION};
