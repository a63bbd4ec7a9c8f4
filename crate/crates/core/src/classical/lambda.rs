use alloc::vec::Vec;

use num_complex::Complex64;

use super::density::{l1_distance, pf_apply, AffineDensity, CircleDensity, RadicMap};
use crate::error::{Error, Result};
use crate::exponent::ExponentEstimate;
use crate::fit::linear_fit;

/// Distances at or below this are treated as exact convergence.
pub const CONVERGED: f64 = 1e-13;
/// Probes within this L1 distance of the reference are rejected.
pub const PROBE_SEPARATION: f64 = 1e-12;

/// `f_k(u) = 1 + (2u - 1) / k`, i.e. `1 + (x - pi) / (k pi)` with `x = 2 pi u`.
pub fn linear_probe(k: u32) -> Result<CircleDensity> {
    let k = k as f64;
    Ok(AffineDensity::line(1.0 - 1.0 / k, 2.0 / k)?.into())
}

/// Per probe, the slope of `-log ||P^n f - P^n f0||_1` against `n` over
/// `n` in `[n_max / 2, n_max]`; the estimate is the minimum slope. Probes
/// that reach `f0` exactly (distance at most [`CONVERGED`]) inside the window
/// are excluded with a logged notice.
pub fn lambda_classical(f0: &CircleDensity, probes: &[CircleDensity], map: &RadicMap, n_max: usize) -> Result<ExponentEstimate> {
    if n_max < 4 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            expected: ">= 4",
        });
    }
    if probes.is_empty() {
        return Err(Error::NoUsableProbes("empty probe list".into()));
    }
    let n_lo = n_max.div_ceil(2);
    let mut fits = Vec::with_capacity(probes.len());
    for (index, probe) in probes.iter().enumerate() {
        if l1_distance(probe, f0)? < PROBE_SEPARATION {
            return Err(Error::ProbeEqualsReference { index });
        }
        let (mut f, mut g) = (probe.clone(), f0.clone());
        let mut ns = Vec::new();
        let mut ys = Vec::new();
        let mut converged = false;
        for n in 1..=n_max {
            f = pf_apply(&f, map)?;
            g = pf_apply(&g, map)?;
            if n < n_lo {
                continue;
            }
            let d = l1_distance(&f, &g)?;
            if d <= CONVERGED {
                log::info!("probe {index} reached the reference after {n} iterations; excluded from the fit");
                converged = true;
                break;
            }
            ns.push(n as f64);
            ys.push(-libm::log(d));
        }
        if converged {
            fits.push(None);
        } else {
            let fit = linear_fit(&ns, &ys)?;
            fits.push(Some((fit.slope, fit.rms_residual)));
        }
    }
    ExponentEstimate::from_fits(fits, (n_lo as f64, n_max as f64))
}

/// `((P^n f)^(k), f^(k r^n))`. Grid densities must keep `k r^n` below half
/// the grid size.
pub fn fourier_check(f: &CircleDensity, map: &RadicMap, k: i64, n: u32) -> Result<(Complex64, Complex64)> {
    let index = (map.r() as u64)
        .checked_pow(n)
        .and_then(|p| p.checked_mul(k.unsigned_abs()))
        .ok_or(Error::AliasLimit { index: u64::MAX, limit: 0 })?;
    if let CircleDensity::Grid(g) = f {
        let limit = g.cells() as u64 / 2;
        if index >= limit {
            return Err(Error::AliasLimit { index, limit });
        }
    }
    let mut p = f.clone();
    for _ in 0..n {
        p = pf_apply(&p, map)?;
    }
    let signed = if k < 0 { -(index as i64) } else { index as i64 };
    Ok((p.fourier(k), f.fourier(signed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::GridDensity;

    #[test]
    fn log_r_from_linear_probes() {
        let one = CircleDensity::Affine(AffineDensity::uniform());
        let probes: Vec<_> = (1..=5).map(|k| linear_probe(k).unwrap()).collect();
        for r in [2u32, 3] {
            let est = lambda_classical(&one, &probes, &RadicMap::new(r).unwrap(), 20).unwrap();
            assert!((est.lambda / libm::log(r as f64) - 1.0).abs() < 1e-6, "r = {r}: {}", est.lambda);
        }
    }

    #[test]
    fn reference_probe_rejected() {
        let one = CircleDensity::Affine(AffineDensity::uniform());
        let out = lambda_classical(&one, core::slice::from_ref(&one), &RadicMap::new(2).unwrap(), 10);
        assert_eq!(out, Err(Error::ProbeEqualsReference { index: 0 }));
    }

    #[test]
    fn probe_reaching_uniform_is_excluded() {
        // A step on the first half becomes uniform after one application of P.
        let step = GridDensity::new((0..64).map(|j| if j < 32 { 1.5 } else { 0.5 }).collect()).unwrap();
        // Frequency 16 halves at each step and survives four of them.
        let smooth = GridDensity::from_fn(64, |u| 1.0 + 0.5 * libm::cos(32.0 * core::f64::consts::PI * u)).unwrap();
        let one = CircleDensity::Grid(GridDensity::uniform(64));
        let est = lambda_classical(&one, &[step.into(), smooth.into()], &RadicMap::new(2).unwrap(), 4).unwrap();
        assert_eq!(est.probe_slopes[0], None);
        assert!(est.probe_slopes[1].is_some());
    }

    #[test]
    fn alias_limit() {
        let g = CircleDensity::Grid(GridDensity::uniform(64));
        let map = RadicMap::new(2).unwrap();
        assert!(fourier_check(&g, &map, 1, 4).is_ok());
        assert!(matches!(fourier_check(&g, &map, 1, 5), Err(Error::AliasLimit { index: 32, limit: 32 })));
    }

    #[test]
    fn fourier_identity_on_cosine() {
        let map = RadicMap::new(2).unwrap();
        let f = CircleDensity::Grid(GridDensity::from_fn(256, |u| 1.0 + libm::cos(2.0 * core::f64::consts::PI * u)).unwrap());
        let (a, b) = fourier_check(&f, &map, 1, 1).unwrap();
        assert!((a - b).norm() < 1e-13);
        assert!((b - f.fourier(2)).norm() == 0.0);
    }
}
