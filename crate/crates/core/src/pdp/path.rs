use alloc::vec::Vec;

use super::ifs::{Detector, PureSpinState, TetrahedronIfs};
use crate::error::{Error, Result};
use crate::rng::PathRng;

/// Renormalizations larger than this are logged.
const DRIFT_LOG: f64 = 1e-12;

/// How the Poisson jump rate relates to the coupling constant `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpRateConvention {
    /// Rate `kappa`, as stated for the process.
    #[default]
    Literal,
    /// Rate `kappa (1 + alpha^2)`, the trace of the Lindblad term
    /// `kappa sum_i a_i^+ a_i`. This is the rate whose ensemble average solves
    /// the master equation.
    Lindblad,
}

impl JumpRateConvention {
    pub fn rate(self, kappa: f64, alpha: f64) -> f64 {
        match self {
            JumpRateConvention::Literal => kappa,
            JumpRateConvention::Lindblad => kappa * (1.0 + alpha * alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdpParams {
    pub omega: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub convention: JumpRateConvention,
}

impl PdpParams {
    pub fn new(omega: f64, kappa: f64, alpha: f64) -> Self {
        PdpParams {
            omega,
            kappa,
            alpha,
            convention: JumpRateConvention::Literal,
        }
    }

    pub fn with_convention(mut self, convention: JumpRateConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn rate(&self) -> f64 {
        self.convention.rate(self.kappa, self.alpha)
    }

    fn validate(&self) -> Result<TetrahedronIfs> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: self.kappa,
                expected: "finite and > 0",
            });
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: self.omega,
                expected: "finite",
            });
        }
        TetrahedronIfs::new(self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub detector: Detector,
    /// State right after the jump.
    pub state: PureSpinState,
}

/// One realization of the process: free rotation about z between
/// Poisson-timed jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub initial: PureSpinState,
    pub jumps: Vec<JumpRecord>,
    pub params: PdpParams,
    pub seed: u64,
    /// Largest renormalization applied after a jump.
    pub max_renormalization: f64,
}

impl SamplePath {
    /// State at time `t`: the last post-jump state, rotated for the time
    /// elapsed since. Times past the last jump assume no further jumps.
    pub fn state_at(&self, t: f64) -> PureSpinState {
        let k = self.jumps.partition_point(|j| j.time <= t);
        let (t0, r) = if k == 0 {
            (0.0, self.initial)
        } else {
            (self.jumps[k - 1].time, self.jumps[k - 1].state)
        };
        r.rotate_z(self.params.omega * (t - t0))
    }
}

/// The stepping shared by every sampler: per jump, one exponential waiting
/// time and then one uniform for the detector, in that order.
struct Stepper {
    ifs: TetrahedronIfs,
    omega: f64,
    rate: f64,
    rng: PathRng,
    max_renormalization: f64,
}

impl Stepper {
    fn new(params: &PdpParams, seed: u64) -> Result<Self> {
        Ok(Stepper {
            ifs: params.validate()?,
            omega: params.omega,
            rate: params.rate(),
            rng: PathRng::seed_from_u64(seed),
            max_renormalization: 0.0,
        })
    }

    fn wait(&mut self) -> f64 {
        self.rng.exponential(self.rate)
    }

    fn jump(&mut self, r: &PureSpinState) -> Result<(Detector, PureSpinState)> {
        let d = self.ifs.choose(r, self.rng.uniform());
        let (next, drift) = self.ifs.jump(r, d)?;
        if drift > self.max_renormalization {
            self.max_renormalization = drift;
            if drift > DRIFT_LOG {
                log::debug!("renormalized jump output by {drift:e}");
            }
        }
        Ok((d, next))
    }
}

/// `n_jumps` jumps of the process started at `r0`.
pub fn sample_path(params: &PdpParams, r0: &PureSpinState, n_jumps: usize, seed: u64) -> Result<SamplePath> {
    if n_jumps == 0 {
        return Err(Error::InvalidParameter {
            name: "n_jumps",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let mut st = Stepper::new(params, seed)?;
    let mut jumps = Vec::with_capacity(n_jumps);
    let mut t = 0.0;
    let mut r = *r0;
    for _ in 0..n_jumps {
        let tau = st.wait();
        t += tau;
        r = r.rotate_z(st.omega * tau);
        let (detector, next) = st.jump(&r)?;
        r = next;
        jumps.push(JumpRecord { time: t, detector, state: r });
    }
    Ok(SamplePath {
        initial: *r0,
        jumps,
        params: *params,
        seed,
        max_renormalization: st.max_renormalization,
    })
}

/// State of one path at time `t`, simulating only as many jumps as needed.
pub fn state_at_time(params: &PdpParams, r0: &PureSpinState, t: f64, seed: u64) -> Result<PureSpinState> {
    let mut st = Stepper::new(params, seed)?;
    let mut now = 0.0;
    let mut r = *r0;
    loop {
        let tau = st.wait();
        if now + tau > t {
            return Ok(r.rotate_z(st.omega * (t - now)));
        }
        now += tau;
        r = r.rotate_z(st.omega * tau);
        r = st.jump(&r)?.1;
    }
}

/// Seed of path `index` in an ensemble started from `seed`.
pub fn path_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index)
}

/// Mean Bloch vector at time `t` over `n_paths` paths with seeds
/// [`path_seed`]`(seed, 0..n_paths)`, summed in path order.
pub fn ensemble_bloch(params: &PdpParams, r0: &PureSpinState, t: f64, n_paths: usize, seed: u64) -> Result<[f64; 3]> {
    let mut sum = [0.0; 3];
    for i in 0..n_paths {
        let r = state_at_time(params, r0, t, path_seed(seed, i as u64))?.vector();
        for k in 0..3 {
            sum[k] += r[k];
        }
    }
    let n = n_paths.max(1) as f64;
    Ok([sum[0] / n, sum[1] / n, sum[2] / n])
}

/// Post-jump states of the free (`omega = 0`, `kappa = 1`) process.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosGame {
    pub points: Vec<[f64; 3]>,
    /// Detector that produced each point.
    pub detectors: Vec<Detector>,
    pub max_renormalization: f64,
}

/// Default starting point of the chaos game.
pub const CHAOS_GAME_START: [f64; 3] = [0.0, 0.0, 1.0];

/// Runs `burn_in + n_points` jumps from `r0` and keeps the last `n_points`
/// post-jump states. The random stream is the one [`sample_path`] uses with
/// `omega = 0` and `kappa = 1`.
pub fn chaos_game(alpha: f64, n_points: usize, seed: u64, burn_in: usize, r0: &PureSpinState) -> Result<ChaosGame> {
    if n_points == 0 {
        return Err(Error::InvalidParameter {
            name: "n_points",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let mut st = Stepper::new(&PdpParams::new(0.0, 1.0, alpha), seed)?;
    let mut points = Vec::with_capacity(n_points);
    let mut detectors = Vec::with_capacity(n_points);
    let mut r = *r0;
    for k in 0..burn_in + n_points {
        st.wait();
        let (d, next) = st.jump(&r)?;
        r = next;
        if k >= burn_in {
            points.push(r.vector());
            detectors.push(d);
        }
    }
    Ok(ChaosGame {
        points,
        detectors,
        max_renormalization: st.max_renormalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn north() -> PureSpinState {
        PureSpinState::new(CHAOS_GAME_START).unwrap()
    }

    #[test]
    fn paths_are_reproducible() {
        let p = PdpParams::new(1.0, 1.0, 0.7);
        let a = sample_path(&p, &north(), 500, 42).unwrap();
        let b = sample_path(&p, &north(), 500, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_path(&p, &north(), 500, 43).unwrap();
        assert_ne!(a.jumps, c.jumps);
    }

    #[test]
    fn times_increase() {
        let p = PdpParams::new(2.0, 3.0, 0.4);
        let path = sample_path(&p, &north(), 1000, 1).unwrap();
        assert!(path.jumps.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn no_rotation_without_omega() {
        let p = PdpParams::new(0.0, 1.0, 0.6);
        let path = sample_path(&p, &north(), 50, 9).unwrap();
        for w in path.jumps.windows(2) {
            let mid = 0.5 * (w[0].time + w[1].time);
            assert_eq!(path.state_at(mid), w[0].state);
        }
    }

    #[test]
    fn mean_waiting_time() {
        let p = PdpParams::new(0.0, 1.0, 0.5);
        let path = sample_path(&p, &north(), 10_000, 2).unwrap();
        let mean = path.jumps.last().unwrap().time / 10_000.0;
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn full_coupling_lands_on_vertices() {
        let p = PdpParams::new(0.0, 1.0, 1.0);
        let path = sample_path(&p, &north(), 1000, 3).unwrap();
        let n = crate::tetrahedron::directions();
        for j in &path.jumps {
            let v = n[j.detector.index()];
            for k in 0..3 {
                assert!((j.state.vector()[k] - v[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chaos_game_matches_sample_path_stream() {
        let game = chaos_game(0.7, 200, 11, 50, &north()).unwrap();
        let path = sample_path(&PdpParams::new(0.0, 1.0, 0.7), &north(), 250, 11).unwrap();
        for (k, p) in game.points.iter().enumerate() {
            assert_eq!(*p, path.jumps[50 + k].state.vector());
            assert_eq!(game.detectors[k], path.jumps[50 + k].detector);
        }
    }

    #[test]
    fn chaos_game_degenerate_cases() {
        let g0 = chaos_game(0.0, 100, 1, 10, &north()).unwrap();
        assert!(g0.points.iter().all(|p| *p == CHAOS_GAME_START));
        let g1 = chaos_game(1.0, 1000, 1, 10, &north()).unwrap();
        let n = crate::tetrahedron::directions();
        for p in &g1.points {
            assert!(n.iter().any(|v| (0..3).all(|k| (p[k] - v[k]).abs() < 1e-12)));
        }
    }

    #[test]
    fn state_at_time_before_first_jump_is_rotation() {
        let p = PdpParams::new(1.0, 1e-9, 0.5);
        let r = state_at_time(&p, &PureSpinState::new([1.0, 0.0, 0.0]).unwrap(), 0.5, 4).unwrap();
        let v = r.vector();
        assert!((v[0] - libm::cos(0.5)).abs() < 1e-15);
        assert!((v[1] - libm::sin(0.5)).abs() < 1e-15);
    }

    #[test]
    fn conventions() {
        assert_eq!(JumpRateConvention::Literal.rate(2.0, 0.5), 2.0);
        assert_eq!(JumpRateConvention::Lindblad.rate(2.0, 0.5), 2.5);
    }
}
