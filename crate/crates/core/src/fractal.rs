//! Box-counting dimension of point sets on the unit sphere.
//!
//! The sphere is covered by the six faces of the circumscribed cube through
//! central (gnomonic) projection, and each face is cut into `2^k x 2^k` cells
//! at level `k`. Cell keys are Morton codes, so the key at a coarser level is
//! the finer key shifted right by two bits per level.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::linear_fit;

/// Points further than this from the unit sphere are rejected.
pub const CLOUD_SPHERE_TOL: f64 = 1e-9;
/// Deepest supported level (`2^26` cells per face edge).
pub const MAX_LEVEL: u32 = 26;

/// Points on the unit sphere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        for (index, p) in points.iter().enumerate() {
            let n = libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            let deviation = (n - 1.0).abs();
            if !(deviation <= CLOUD_SPHERE_TOL) {
                return Err(Error::OffSphere { index, deviation });
            }
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<[f64; 3]> {
        self.points
    }
}

/// Spreads the low 32 bits of `v` to the even bit positions.
fn spread(v: u64) -> u64 {
    let mut x = v & 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

/// Cube face (`2 * axis + (negative ? 1 : 0)`) and face coordinates
/// `(u, v)` in `[-1, 1]`.
pub fn cube_face(p: &[f64; 3]) -> (u8, f64, f64) {
    let a = [p[0].abs(), p[1].abs(), p[2].abs()];
    let axis = if a[0] >= a[1] && a[0] >= a[2] {
        0
    } else if a[1] >= a[2] {
        1
    } else {
        2
    };
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    let face = 2 * axis as u8 + u8::from(p[axis] < 0.0);
    (face, p[b] / a[axis], p[c] / a[axis])
}

/// Cell key of `p` at `level`: face in the top bits, Morton code of the cell
/// indices below.
pub fn cell_key(p: &[f64; 3], level: u32) -> u64 {
    let (face, u, v) = cube_face(p);
    let cells = (1u64 << level) as f64;
    let max = (1u64 << level) - 1;
    let i = (((u + 1.0) * 0.5 * cells) as u64).min(max);
    let j = (((v + 1.0) * 0.5 * cells) as u64).min(max);
    ((face as u64) << (2 * level)) | (spread(i) << 1) | spread(j)
}

fn angle(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let s = libm::sqrt(cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]);
    libm::atan2(s, a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
}

/// Geodesic diameter of face cell `(i, j)` at `level`: the largest angle
/// between two of its corners.
fn cell_diameter_at(level: u32, i: u64, j: u64) -> f64 {
    let h = 2.0 / (1u64 << level) as f64;
    let (u0, v0) = (-1.0 + i as f64 * h, -1.0 + j as f64 * h);
    let corners = [[u0, v0, 1.0], [u0 + h, v0, 1.0], [u0, v0 + h, 1.0], [u0 + h, v0 + h, 1.0]];
    let mut best: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            best = best.max(angle(&corners[a], &corners[b]));
        }
    }
    best
}

/// Largest geodesic cell diameter at `level`. Gnomonic cells are largest at
/// the face centre, so one of the central cells attains the maximum.
pub fn max_cell_diameter(level: u32) -> f64 {
    if level == 0 {
        return cell_diameter_at(0, 0, 0);
    }
    let c = 1u64 << (level - 1);
    cell_diameter_at(level, c, c).max(cell_diameter_at(level, c - 1, c))
}

/// Occupied-cell counts of a cloud across levels `1..=levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountResult {
    pub levels: Vec<u32>,
    /// Maximal geodesic cell diameter per level.
    pub epsilons: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_points: usize,
}

fn check_levels(levels: u32) -> Result<()> {
    if !(4..=MAX_LEVEL).contains(&levels) {
        return Err(Error::InvalidParameter {
            name: "levels",
            value: levels as f64,
            expected: "between 4 and 26",
        });
    }
    Ok(())
}

/// Counts from keys at level `levels`, sorted ascending.
pub fn counts_from_sorted_keys(keys: &[u64], levels: u32) -> Result<BoxCountResult> {
    check_levels(levels)?;
    if keys.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut counts = Vec::with_capacity(levels as usize);
    for k in 1..=levels {
        let shift = 2 * (levels - k);
        let mut n = 1u64;
        for w in keys.windows(2) {
            if w[0] >> shift != w[1] >> shift {
                n += 1;
            }
        }
        counts.push(n);
    }
    Ok(BoxCountResult {
        levels: (1..=levels).collect(),
        epsilons: (1..=levels).map(max_cell_diameter).collect(),
        counts,
        n_points: keys.len(),
    })
}

pub fn box_count(cloud: &PointCloud, levels: u32) -> Result<BoxCountResult> {
    check_levels(levels)?;
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut keys: Vec<u64> = cloud.points().iter().map(|p| cell_key(p, levels)).collect();
    keys.sort_unstable();
    counts_from_sorted_keys(&keys, levels)
}

/// Slope of `log N` against `log(1/eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFit {
    pub dimension: f64,
    /// First and last level used.
    pub fit_range: (u32, u32),
    pub used_levels: Vec<u32>,
    pub rms_residual: f64,
    pub r_squared: f64,
}

/// Least-squares slope over the levels with `10 <= N <= n_points / 10`.
pub fn estimate_dimension(result: &BoxCountResult) -> Result<DimensionFit> {
    let upper = result.n_points as f64 / 10.0;
    let mut used_levels = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ((&k, &eps), &n) in result.levels.iter().zip(&result.epsilons).zip(&result.counts) {
        let nf = n as f64;
        if (10.0..=upper).contains(&nf) {
            used_levels.push(k);
            xs.push(-libm::log(eps));
            ys.push(libm::log(nf));
        }
    }
    if used_levels.len() < 3 {
        return Err(Error::InsufficientLevels {
            usable: used_levels.len(),
        });
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(DimensionFit {
        dimension: fit.slope,
        fit_range: (used_levels[0], used_levels[used_levels.len() - 1]),
        used_levels,
        rms_residual: fit.rms_residual,
        r_squared: fit.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::PathRng;
    use alloc::vec;

    #[test]
    fn morton_coarsening() {
        let p = [0.3, -0.5, 0.81];
        let n = libm::sqrt(0.3 * 0.3 + 0.25 + 0.81 * 0.81);
        let p = [p[0] / n, p[1] / n, p[2] / n];
        for fine in 5..12 {
            for coarse in 1..fine {
                assert_eq!(cell_key(&p, fine) >> (2 * (fine - coarse)), cell_key(&p, coarse));
            }
        }
    }

    #[test]
    fn faces_cover_the_sphere() {
        let faces: Vec<u8> = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
            .iter()
            .map(|p| cube_face(p).0)
            .collect();
        assert_eq!(faces, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn central_cell_has_the_largest_diameter() {
        for level in 1..=7u32 {
            let side = 1u64 << level;
            let mut full: f64 = 0.0;
            for i in 0..side {
                for j in 0..side {
                    full = full.max(cell_diameter_at(level, i, j));
                }
            }
            assert!((full - max_cell_diameter(level)).abs() < 1e-15, "level {level}");
        }
        // Whole face: corner to corner.
        assert!((max_cell_diameter(0) - libm::acos(-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn single_point_and_vertices() {
        let one = PointCloud::new(vec![[0.0, 0.0, 1.0]]).unwrap();
        assert!(box_count(&one, 8).unwrap().counts.iter().all(|&n| n == 1));
        let verts = PointCloud::new(crate::tetrahedron::directions().to_vec()).unwrap();
        let r = box_count(&verts, 10).unwrap();
        assert!(r.counts.iter().all(|&n| n == 4));
    }

    #[test]
    fn counts_grow_at_most_fourfold() {
        let mut rng = PathRng::seed_from_u64(3);
        let pts: Vec<[f64; 3]> = (0..20_000).map(|_| rng.unit_vector()).collect();
        let r = box_count(&PointCloud::new(pts).unwrap(), 10).unwrap();
        for w in r.counts.windows(2) {
            assert!(w[0] <= w[1]);
            assert!(w[1] <= 4 * w[0]);
        }
        for w in r.epsilons.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn too_few_levels_is_an_error() {
        let pts = vec![[1.0, 0.0, 0.0]];
        let r = box_count(&PointCloud::new(pts).unwrap(), 6).unwrap();
        assert!(matches!(estimate_dimension(&r), Err(Error::InsufficientLevels { .. })));
        assert!(box_count(&PointCloud::default(), 6).is_err());
        assert!(box_count(&PointCloud::new(vec![[1.0, 0.0, 0.0]]).unwrap(), 3).is_err());
    }

    #[test]
    fn off_sphere_points_rejected() {
        assert!(matches!(
            PointCloud::new(vec![[1.0, 0.0, 0.0], [0.5, 0.0, 0.0]]),
            Err(Error::OffSphere { index: 1, .. })
        ));
    }
}
