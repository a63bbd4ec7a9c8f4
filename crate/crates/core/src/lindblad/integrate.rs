use alloc::vec::Vec;

use super::model::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, Matrix2};

/// Negative eigenvalues down to this size are clamped.
pub const POSITIVITY_ABORT: f64 = 1e-6;
/// Clamps larger than this are reported with a warning.
pub const POSITIVITY_WARN: f64 = 1e-9;

/// Sampled solution of `d rho/dt = L(rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Integrator step actually used.
    pub step: f64,
    pub method: &'static str,
    /// Number of steps whose state needed a positivity clamp.
    pub clamped_steps: usize,
}

impl StateTrajectory {
    pub fn last(&self) -> (f64, DensityMatrix) {
        let n = self.times.len() - 1;
        (self.times[n], self.states[n])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t_end: f64,
    /// Upper bound on the step; the step used is `t_end / ceil(t_end / dt)`.
    pub dt: f64,
    /// Record every n-th step (the final state is always recorded).
    pub record_every: usize,
}

pub(crate) fn rk4_step(model: &LindbladModel, m: &Matrix2, h: f64) -> Matrix2 {
    let k1 = model.apply(m);
    let k2 = model.apply(&(*m + k1 * (0.5 * h)));
    let k3 = model.apply(&(*m + k2 * (0.5 * h)));
    let k4 = model.apply(&(*m + k3 * h));
    *m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            expected: "finite and > 0",
        });
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            expected: "finite and >= 0",
        });
    }
    let n = libm::ceil(t_end / dt * (1.0 - 1e-12));
    Ok(n as usize)
}

/// Classical fourth-order Runge-Kutta integration, recording every step.
pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<StateTrajectory> {
    evolve_with(
        model,
        rho0,
        &EvolveOptions {
            t_end,
            dt,
            record_every: 1,
        },
    )
}

pub fn evolve_with(model: &LindbladModel, rho0: &DensityMatrix, opts: &EvolveOptions) -> Result<StateTrajectory> {
    let n = step_count(opts.t_end, opts.dt)?;
    let record_every = opts.record_every.max(1);
    let h = if n == 0 { opts.dt } else { opts.t_end / n as f64 };

    let mut times = alloc::vec![0.0];
    let mut states = alloc::vec![*rho0];
    let mut clamped_steps = 0;
    let mut m = *rho0.matrix();
    for step in 1..=n {
        m = rk4_step(model, &m, h);
        let t = if step == n { opts.t_end } else { step as f64 * h };
        let (lo, _) = m.hermitian_eigenvalues_unchecked();
        if lo < -POSITIVITY_ABORT {
            return Err(Error::PositivityViolation { time: t, min_eigenvalue: lo });
        }
        if lo < 0.0 {
            // Pull the Bloch vector back onto the sphere.
            let (a0, mut x) = m.pauli_coefficients();
            let norm = libm::sqrt(x.iter().map(|v| v * v).sum());
            let target = a0;
            for v in x.iter_mut() {
                *v *= target / norm;
            }
            m = Matrix2::from_pauli(a0, x);
            clamped_steps += 1;
            if -lo > POSITIVITY_WARN {
                log::warn!("clamped negative eigenvalue {lo:e} at t = {t}");
            }
        }
        if step % record_every == 0 || step == n {
            times.push(t);
            states.push(DensityMatrix::from_matrix_unchecked(m));
        }
    }
    Ok(StateTrajectory {
        times,
        states,
        step: h,
        method: "rk4",
        clamped_steps,
    })
}

/// Integrates the linear equation `dM/dt = L(M)` for an arbitrary matrix,
/// without positivity bookkeeping. Used to transport differences of states.
pub fn propagate(model: &LindbladModel, m0: &Matrix2, t: f64, dt: f64) -> Result<Matrix2> {
    let n = step_count(t, dt)?;
    if n == 0 {
        return Ok(*m0);
    }
    let h = t / n as f64;
    let mut m = *m0;
    for _ in 0..n {
        m = rk4_step(model, &m, h);
    }
    Ok(m)
}
