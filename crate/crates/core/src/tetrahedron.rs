//! The four detector directions at the vertices of a regular tetrahedron.

/// `n_1 .. n_4`, in detector order.
pub fn directions() -> [[f64; 3]; 4] {
    let third = 1.0 / 3.0;
    let s2 = libm::sqrt(2.0);
    let s23 = libm::sqrt(2.0 / 3.0);
    [
        [1.0, 0.0, 0.0],
        [-third, 0.0, 2.0 * s2 / 3.0],
        [-third, s23, -s2 / 3.0],
        [-third, -s23, -s2 / 3.0],
    ]
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_length_and_zero_sum() {
        let n = directions();
        let mut sum = [0.0; 3];
        for v in &n {
            assert!((dot(v, v) - 1.0).abs() <= 1e-15);
            for k in 0..3 {
                sum[k] += v[k];
            }
        }
        for s in sum {
            assert!(s.abs() <= 1e-15);
        }
    }

    #[test]
    fn pairwise_angles_are_tetrahedral() {
        let n = directions();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((dot(&n[i], &n[j]) + 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
    }
}
