use core::fmt;

use crate::error::{Error, Result};
use crate::tetrahedron::{self, dot};

/// Jump denominators below this are treated as singular.
pub const SINGULAR_DENOMINATOR: f64 = 1e-12;
/// States further than this from the unit sphere are rejected.
pub const SPHERE_TOL: f64 = 1e-9;

/// Detector label `1..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Detector(u8);

impl Detector {
    pub const ALL: [Detector; 4] = [Detector(1), Detector(2), Detector(3), Detector(4)];

    pub fn new(number: u8) -> Result<Self> {
        if (1..=4).contains(&number) {
            Ok(Detector(number))
        } else {
            Err(Error::InvalidParameter {
                name: "detector",
                value: number as f64,
                expected: "1, 2, 3 or 4",
            })
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    /// Zero-based position in detector order.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A pure spin state, i.e. a point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureSpinState([f64; 3]);

impl PureSpinState {
    /// Accepts vectors within [`SPHERE_TOL`] of unit length and normalizes them.
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let n = libm::sqrt(dot(&r, &r));
        if !n.is_finite() || (n - 1.0).abs() > SPHERE_TOL {
            return Err(Error::OffSphere {
                index: 0,
                deviation: (n - 1.0).abs(),
            });
        }
        Ok(PureSpinState([r[0] / n, r[1] / n, r[2] / n]))
    }

    pub fn vector(&self) -> [f64; 3] {
        self.0
    }

    /// Rotation about the z axis by `angle` (counterclockwise seen from +z).
    pub fn rotate_z(&self, angle: f64) -> Self {
        if angle == 0.0 {
            return *self;
        }
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let [x, y, z] = self.0;
        PureSpinState([c * x - s * y, s * x + c * y, z])
    }

    /// Normalizes and returns the size of the correction.
    pub(crate) fn renormalized(r: [f64; 3]) -> (Self, f64) {
        let n = libm::sqrt(dot(&r, &r));
        (PureSpinState([r[0] / n, r[1] / n, r[2] / n]), (n - 1.0).abs())
    }
}

/// The four detector maps with coupling `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetrahedronIfs {
    alpha: f64,
    directions: [[f64; 3]; 4],
}

impl TetrahedronIfs {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                expected: "in [0, 1]",
            });
        }
        Ok(TetrahedronIfs {
            alpha,
            directions: tetrahedron::directions(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn direction(&self, d: Detector) -> [f64; 3] {
        self.directions[d.index()]
    }

    /// `r_i = [(1 - a^2) r + 2a (1 + a r.n_i) n_i] / (1 + a^2 + 2a r.n_i)`,
    /// renormalized onto the sphere. Returns the new state and the size of
    /// the renormalization.
    pub fn jump(&self, r: &PureSpinState, d: Detector) -> Result<(PureSpinState, f64)> {
        let a = self.alpha;
        let n = self.directions[d.index()];
        let rn = dot(&r.0, &n);
        let den = 1.0 + a * a + 2.0 * a * rn;
        if den < SINGULAR_DENOMINATOR {
            return Err(Error::SingularJump {
                detector: d.number(),
                denominator: den,
            });
        }
        let cr = (1.0 - a * a) / den;
        let cn = 2.0 * a * (1.0 + a * rn) / den;
        let v = [cr * r.0[0] + cn * n[0], cr * r.0[1] + cn * n[1], cr * r.0[2] + cn * n[2]];
        Ok(PureSpinState::renormalized(v))
    }

    /// `p_i = (1 + a^2 + 2a r.n_i) / (4 (1 + a^2))`.
    pub fn probabilities(&self, r: &PureSpinState) -> [f64; 4] {
        let a = self.alpha;
        let norm = 4.0 * (1.0 + a * a);
        let mut p = [0.0; 4];
        for (pi, n) in p.iter_mut().zip(&self.directions) {
            *pi = ((1.0 + a * a + 2.0 * a * dot(&r.0, n)) / norm).max(0.0);
        }
        p
    }

    /// Inverse-CDF choice over [`probabilities`](Self::probabilities) in
    /// detector order 1..4 with one uniform `u` in `[0, 1)`.
    pub fn choose(&self, r: &PureSpinState, u: f64) -> Detector {
        let p = self.probabilities(r);
        let mut acc = 0.0;
        for (k, pk) in p.iter().enumerate().take(3) {
            acc += pk;
            if u < acc {
                return Detector((k + 1) as u8);
            }
        }
        Detector(4)
    }
}

/// Image of `r` under detector `i`'s map at coupling `alpha`.
pub fn jump_map(r: &PureSpinState, i: Detector, alpha: f64) -> Result<PureSpinState> {
    Ok(TetrahedronIfs::new(alpha)?.jump(r, i)?.0)
}

/// Probabilities of the four detectors firing from `r`.
pub fn jump_probs(r: &PureSpinState, alpha: f64) -> Result<[f64; 4]> {
    Ok(TetrahedronIfs::new(alpha)?.probabilities(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::PathRng;

    fn random_state(rng: &mut PathRng) -> PureSpinState {
        PureSpinState::new(rng.unit_vector()).unwrap()
    }

    #[test]
    fn zero_coupling_is_identity() {
        let mut rng = PathRng::seed_from_u64(5);
        for _ in 0..50 {
            let r = random_state(&mut rng);
            for d in Detector::ALL {
                let out = jump_map(&r, d, 0.0).unwrap();
                for k in 0..3 {
                    assert!((out.0[k] - r.0[k]).abs() < 1e-15);
                }
            }
            assert_eq!(jump_probs(&r, 0.0).unwrap(), [0.25; 4]);
        }
    }

    #[test]
    fn full_coupling_projects_onto_the_detector_axis() {
        let mut rng = PathRng::seed_from_u64(6);
        let ifs = TetrahedronIfs::new(1.0).unwrap();
        for _ in 0..100 {
            let r = random_state(&mut rng);
            for d in Detector::ALL {
                let out = ifs.jump(&r, d).unwrap().0;
                let n = ifs.direction(d);
                for k in 0..3 {
                    assert!((out.0[k] - n[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn own_axis_is_fixed() {
        let ifs = TetrahedronIfs::new(0.5).unwrap();
        for d in Detector::ALL {
            let n = PureSpinState::new(ifs.direction(d)).unwrap();
            let out = ifs.jump(&n, d).unwrap().0;
            for k in 0..3 {
                assert!((out.0[k] - n.0[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = PathRng::seed_from_u64(8);
        for _ in 0..200 {
            let alpha = rng.uniform();
            let p = jump_probs(&random_state(&mut rng), alpha).unwrap();
            assert!(p.iter().all(|v| *v >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_at_a_vertex() {
        let r = PureSpinState::new(tetrahedron::directions()[0]).unwrap();
        let p = jump_probs(&r, 1.0).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        for v in &p[1..] {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn antipode_is_singular_at_full_coupling() {
        let n = tetrahedron::directions()[2];
        let r = PureSpinState::new([-n[0], -n[1], -n[2]]).unwrap();
        let d = Detector::new(3).unwrap();
        assert!(matches!(jump_map(&r, d, 1.0), Err(Error::SingularJump { detector: 3, .. })));
        assert_eq!(jump_probs(&r, 1.0).unwrap()[2], 0.0);
    }

    #[test]
    fn choice_follows_cumulative_order() {
        let ifs = TetrahedronIfs::new(0.0).unwrap();
        let r = PureSpinState::new([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(ifs.choose(&r, 0.0).number(), 1);
        assert_eq!(ifs.choose(&r, 0.2499).number(), 1);
        assert_eq!(ifs.choose(&r, 0.25).number(), 2);
        assert_eq!(ifs.choose(&r, 0.74).number(), 3);
        assert_eq!(ifs.choose(&r, 0.9999999).number(), 4);
    }

    #[test]
    fn detector_labels() {
        assert!(Detector::new(0).is_err());
        assert!(Detector::new(5).is_err());
        assert_eq!(Detector::new(4).unwrap().index(), 3);
    }
}
