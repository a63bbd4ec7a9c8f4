//! Quantum characteristic exponents: the asymptotic exponential rate at which
//! trace distances between evolved states shrink.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::lindblad::{propagate, LindbladModel, ModelPreset};
use crate::quantum::{relative_entropy, trace_norm, von_neumann_entropy, BlochVector, DensityMatrix, EntropyValue, Matrix2};
use crate::rng::PathRng;

/// Probes closer than this (in trace distance) to the reference are rejected.
pub const PROBE_SEPARATION: f64 = 1e-6;
/// A probe whose distance to the reference has not shrunk by this factor at
/// the horizon marks the system as not completely mixing.
pub const MIXING_RATIO: f64 = 1e-2;
/// Distance floor when differences are subtracted from integrated states.
pub const INTEGRATOR_FLOOR: f64 = 1e-13;
/// Distance floor when the difference itself is transported by the exact
/// linear flow; there is no cancellation, so only the exponent range matters.
pub const EXACT_FLOOR: f64 = 1e-200;

/// A fitted decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    /// Minimum of the per-probe slopes.
    pub lambda: f64,
    /// `(lo, hi)` of the fit window, in time units or iterations.
    pub fit_window: (f64, f64),
    /// RMS residual of the fit that produced `lambda`.
    pub regression_residual: f64,
    /// Slope for every probe, `None` for probes excluded from the fit.
    pub probe_slopes: Vec<Option<f64>>,
    /// Index of the probe attaining the minimum.
    pub argmin: usize,
}

impl ExponentEstimate {
    /// Takes the minimum over per-probe fits `(slope, rms)`.
    pub(crate) fn from_fits(fits: Vec<Option<(f64, f64)>>, fit_window: (f64, f64)) -> Result<Self> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, f) in fits.iter().enumerate() {
            if let Some((slope, rms)) = *f {
                if best.is_none_or(|(_, s, _)| slope < s) {
                    best = Some((i, slope, rms));
                }
            }
        }
        let (argmin, lambda, regression_residual) =
            best.ok_or_else(|| Error::NoUsableProbes(alloc::format!("all {} probes were excluded", fits.len())))?;
        Ok(ExponentEstimate {
            lambda,
            fit_window,
            regression_residual,
            probe_slopes: fits.into_iter().map(|f| f.map(|(s, _)| s)).collect(),
            argmin,
        })
    }
}

/// Result of a numeric exponent run.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentOutcome {
    Mixing(ExponentEstimate),
    /// Some probe stayed within `MIXING_RATIO` of its initial distance.
    NotCompletelyMixing {
        horizon: f64,
        probe: usize,
        /// `d(t_max) / d(0)` for that probe.
        ratio: f64,
    },
}

impl ExponentOutcome {
    pub fn estimate(&self) -> Option<&ExponentEstimate> {
        match self {
            ExponentOutcome::Mixing(e) => Some(e),
            ExponentOutcome::NotCompletelyMixing { .. } => None,
        }
    }
}

/// Comparison states standing in for the infimum over all `sigma != rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    states: Vec<DensityMatrix>,
}

impl ProbeSet {
    pub fn new(states: Vec<DensityMatrix>) -> Self {
        ProbeSet { states }
    }

    /// The six axis states `+-x, +-y, +-z`, then 10 random pure states and 2
    /// random mixed states drawn from `seed`.
    pub fn default_set(seed: u64) -> Self {
        let mut states = Vec::with_capacity(18);
        for k in 0..3 {
            for sign in [1.0, -1.0] {
                let mut x = [0.0; 3];
                x[k] = sign;
                states.push(DensityMatrix::from_bloch_unchecked(BlochVector(x)));
            }
        }
        let mut rng = PathRng::seed_from_u64(seed);
        for _ in 0..10 {
            states.push(DensityMatrix::from_bloch_unchecked(BlochVector(rng.unit_vector())));
        }
        for _ in 0..2 {
            let r = rng.uniform();
            let v = BlochVector(rng.unit_vector()).scale(r);
            states.push(DensityMatrix::from_bloch_unchecked(v));
        }
        ProbeSet { states }
    }

    /// Drops probes within [`PROBE_SEPARATION`] of `rho_ref`.
    pub fn excluding(&self, rho_ref: &DensityMatrix) -> Self {
        let r = rho_ref.to_bloch();
        ProbeSet {
            states: self
                .states
                .iter()
                .filter(|s| s.to_bloch().sub(&r).norm() >= PROBE_SEPARATION)
                .copied()
                .collect(),
        }
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Closed-form exponent of a preset.
///
/// Tetrahedron: `(4/3) kappa alpha^2`. Zeno with `a = kappa / (4 omega)`:
/// `omega a` for `a <= 1`, `omega / (a + sqrt(a^2 - 1))` beyond. Fluorescence:
/// `gamma / 2`.
pub fn lambda_q_analytic(preset: &ModelPreset) -> Result<f64> {
    preset.validate()?;
    match *preset {
        ModelPreset::Tetrahedron { kappa, alpha, .. } => Ok(4.0 / 3.0 * kappa * alpha * alpha),
        ModelPreset::Zeno { kappa, omega } => {
            if omega == 0.0 || kappa == 0.0 {
                return Ok(0.0);
            }
            let a = kappa / (4.0 * omega);
            Ok(if a <= 1.0 {
                omega * a
            } else {
                omega / (a + libm::sqrt(a * a - 1.0))
            })
        }
        ModelPreset::Fluorescence { gamma, .. } => Ok(0.5 * gamma),
        ModelPreset::SigmaXConjugation => Err(Error::UnsupportedPreset("sigma-x-conjugation")),
    }
}

/// `20 / rate`, with the analytic rate when the preset has one and the
/// model's fastest rate otherwise.
pub fn default_horizon(preset: Option<&ModelPreset>, model: &LindbladModel) -> f64 {
    let rate = preset
        .and_then(|p| lambda_q_analytic(p).ok())
        .filter(|r| *r > 0.0)
        .unwrap_or_else(|| model.max_frequency());
    if rate > 0.0 {
        20.0 / rate
    } else {
        20.0
    }
}

/// How differences of states are carried forward in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagator {
    /// Exponential of the Bloch drift applied to the difference vector.
    Exact,
    /// Fourth-order Runge-Kutta on the difference matrix with this step.
    Integrator { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentOptions {
    pub t_max: f64,
    /// Sample points in the fit window `[t_max / 2, t_max]`.
    pub samples: usize,
    pub propagator: Propagator,
}

impl ExponentOptions {
    pub fn new(t_max: f64) -> Self {
        ExponentOptions {
            t_max,
            samples: 101,
            propagator: Propagator::Exact,
        }
    }

    fn floor(&self) -> f64 {
        match self.propagator {
            Propagator::Exact => EXACT_FLOOR,
            Propagator::Integrator { .. } => INTEGRATOR_FLOOR,
        }
    }
}

/// [`lambda_q_numeric_with`] with default options.
pub fn lambda_q_numeric(model: &LindbladModel, rho_ref: &DensityMatrix, probes: &ProbeSet, t_max: f64) -> Result<ExponentOutcome> {
    lambda_q_numeric_with(model, rho_ref, probes, &ExponentOptions::new(t_max))
}

/// Per probe, the least-squares slope of `-log ||T_t rho_ref - T_t sigma||_1`
/// against `t` on `[t_max / 2, t_max]`; the estimate is the minimum slope.
///
/// Probes whose distance drops below the floor are left out of the minimum
/// when the decay they already showed is faster than the estimate; otherwise
/// the run fails with [`Error::DistanceUnderflow`].
pub fn lambda_q_numeric_with(
    model: &LindbladModel,
    rho_ref: &DensityMatrix,
    probes: &ProbeSet,
    opts: &ExponentOptions,
) -> Result<ExponentOutcome> {
    if !(opts.t_max > 0.0 && opts.t_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: opts.t_max,
            expected: "finite and > 0",
        });
    }
    if probes.is_empty() {
        return Err(Error::NoUsableProbes("empty probe set".into()));
    }
    let samples = opts.samples.max(3);
    let t_lo = 0.5 * opts.t_max;
    let h = (opts.t_max - t_lo) / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples).map(|k| if k + 1 == samples { opts.t_max } else { t_lo + k as f64 * h }).collect();
    let floor = opts.floor();
    let r = rho_ref.to_bloch();

    let mut fits = Vec::with_capacity(probes.len());
    let mut underflows = Vec::new();
    for (index, sigma) in probes.states().iter().enumerate() {
        let d0 = r.sub(&sigma.to_bloch());
        let initial = d0.norm();
        if initial < PROBE_SEPARATION {
            return Err(Error::ProbeEqualsReference { index });
        }
        let distances = transport(model, &d0, &times, opts.propagator)?;
        let last = distances[samples - 1];
        if last / initial > MIXING_RATIO {
            return Ok(ExponentOutcome::NotCompletelyMixing {
                horizon: opts.t_max,
                probe: index,
                ratio: last / initial,
            });
        }
        if let Some(k) = distances.iter().position(|d| !(*d >= floor)) {
            // Too fast to fit; it decays at least at this rate up to times[k].
            let bound = libm::log(initial / floor) / times[k];
            log::info!("probe {index} fell below {floor:e} at t = {}; excluded from the fit", times[k]);
            underflows.push((index, times[k], distances[k], bound));
            fits.push(None);
            continue;
        }
        let ys: Vec<f64> = distances.iter().map(|d| -libm::log(*d)).collect();
        let fit = linear_fit(&times, &ys)?;
        fits.push(Some((fit.slope, fit.rms_residual)));
    }
    let estimate = match ExponentEstimate::from_fits(fits, (t_lo, opts.t_max)) {
        Ok(e) => e,
        Err(_) if !underflows.is_empty() => {
            let (probe, time, distance, _) = underflows[0];
            return Err(Error::DistanceUnderflow { probe, time, distance, floor });
        }
        Err(e) => return Err(e),
    };
    // An excluded probe might have been slower than every fitted one.
    if let Some(&(probe, time, distance, _)) = underflows.iter().find(|u| u.3 < estimate.lambda) {
        return Err(Error::DistanceUnderflow { probe, time, distance, floor });
    }
    Ok(ExponentOutcome::Mixing(estimate))
}

/// Trace distances `||T_t (rho - sigma)||_1` at each of `times` (ascending),
/// where `d0` is the Bloch difference `rho - sigma`.
fn transport(model: &LindbladModel, d0: &BlochVector, times: &[f64], propagator: Propagator) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(times.len());
    match propagator {
        Propagator::Exact => {
            let g = model.bloch_generator();
            let mut t_prev = 0.0;
            let mut d = d0.0;
            for &t in times {
                d = g.flow(t - t_prev).linear.apply(&d);
                t_prev = t;
                out.push(BlochVector(d).norm());
            }
        }
        Propagator::Integrator { dt } => {
            // The difference of two states is traceless: (d . sigma) / 2.
            let mut m = Matrix2::from_pauli(0.0, [0.5 * d0.0[0], 0.5 * d0.0[1], 0.5 * d0.0[2]]);
            let mut t_prev = 0.0;
            for &t in times {
                m = propagate(model, &m, t - t_prev, dt)?;
                t_prev = t;
                out.push(trace_norm(&m)?);
            }
        }
    }
    Ok(out)
}

/// Mixing classification at a finite horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixingClass {
    pub completely_mixing: bool,
    pub exact: bool,
}

/// Completely mixing when every pairwise relative entropy of the evolved
/// probes is below `tol` at `t_max`; exact when additionally every evolved
/// probe has entropy within `tol` of `log 2`.
pub fn classify_mixing(model: &LindbladModel, probes: &ProbeSet, t_max: f64, tol: f64) -> Result<MixingClass> {
    if probes.len() < 2 {
        return Err(Error::NoUsableProbes("classification needs at least two probes".into()));
    }
    let flow = model.bloch_generator().flow(t_max);
    let evolved: Vec<DensityMatrix> = probes
        .states()
        .iter()
        .map(|s| DensityMatrix::from_bloch(BlochVector(flow.apply(&s.to_bloch().0))))
        .collect::<Result<_>>()?;
    let mut completely_mixing = true;
    for (i, a) in evolved.iter().enumerate() {
        for (j, b) in evolved.iter().enumerate() {
            if i == j {
                continue;
            }
            match relative_entropy(a, b) {
                EntropyValue::Finite(h) if h < tol => {}
                _ => completely_mixing = false,
            }
        }
    }
    let exact = completely_mixing
        && evolved
            .iter()
            .all(|s| (von_neumann_entropy(s) - core::f64::consts::LN_2).abs() < tol);
    Ok(MixingClass { completely_mixing, exact })
}

/// Reference state used when only a preset is given: the
/// stationary state when it is unique, `I/2` otherwise.
pub fn preset_reference(preset: &ModelPreset) -> Result<DensityMatrix> {
    let model = crate::lindblad::build_model(preset)?;
    match crate::lindblad::stationary_state(&model) {
        Ok(rho) => Ok(rho),
        Err(Error::NonUniqueStationaryState { .. }) => Ok(DensityMatrix::maximally_mixed()),
        Err(e) => Err(e),
    }
}
