use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qmix_core::classical::{
    entropy, fourier_check, l1_distance, lambda_classical, linear_probe, pf_apply, pf_iterate, relative_entropy_classical, AffineDensity,
    CircleDensity, GridDensity, RadicMap,
};

/// Fourier coefficient of a step function by direct per-cell integration.
fn step_coefficient(values: &[f64], k: i64) -> Complex64 {
    let m = values.len() as f64;
    if k == 0 {
        return Complex64::new(values.iter().sum::<f64>() / m, 0.0);
    }
    let w = 2.0 * PI * k as f64;
    values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let (a, b) = (j as f64 / m, (j + 1) as f64 / m);
            (Complex64::from_polar(1.0, -w * a) - Complex64::from_polar(1.0, -w * b)) / Complex64::new(0.0, w) * *v
        })
        .sum()
}

fn trig_poly(cells: usize, terms: &[(u32, f64, f64)]) -> GridDensity {
    GridDensity::from_fn(cells, |u| {
        1.0 + terms
            .iter()
            .map(|&(k, a, b)| a * (2.0 * PI * k as f64 * u).cos() + b * (2.0 * PI * k as f64 * u).sin())
            .sum::<f64>()
    })
    .unwrap()
}

#[test]
fn doubling_of_two_u_halves_the_distance() {
    let f: CircleDensity = AffineDensity::line(0.0, 2.0).unwrap().into();
    let one: CircleDensity = AffineDensity::uniform().into();
    let map = RadicMap::new(2).unwrap();
    let mut g = f;
    for n in 1..=10 {
        g = pf_apply(&g, &map).unwrap();
        let d = l1_distance(&g, &one).unwrap();
        assert_eq!(d, 1.0 / (2.0 * 2f64.powi(n)), "n = {n}");
    }
}

#[test]
fn lambda_of_uniform_is_log_r() {
    let one: CircleDensity = AffineDensity::uniform().into();
    let probes: Vec<CircleDensity> = (1..=8).map(|k| linear_probe(k).unwrap()).collect();
    for r in [2u32, 3] {
        let est = lambda_classical(&one, &probes, &RadicMap::new(r).unwrap(), 24).unwrap();
        let want = (r as f64).ln();
        assert!((est.lambda / want - 1.0).abs() < 0.02, "r = {r}: {}", est.lambda);
    }
}

#[test]
fn fourier_identity_on_trigonometric_polynomials() {
    let terms = [(1, 0.3, -0.2), (2, 0.1, 0.25), (3, -0.15, 0.05), (5, 0.05, 0.1)];
    for r in [2u32, 3] {
        let map = RadicMap::new(r).unwrap();
        let cells = (r as usize).pow(4) * 64;
        let f: CircleDensity = trig_poly(cells, &terms).into();
        let CircleDensity::Grid(g) = &f else { unreachable!() };
        for k in [-3i64, -1, 1, 2, 5] {
            for n in 1..=3u32 {
                if (k.unsigned_abs() * (r as u64).pow(n)) as usize >= cells / 2 {
                    continue;
                }
                let (lhs, rhs) = fourier_check(&f, &map, k, n).unwrap();
                assert!((lhs - rhs).norm() < 1e-10, "r = {r}, k = {k}, n = {n}");
                // The right side against a direct integration of the step function.
                let oracle = step_coefficient(g.values(), k * (r as i64).pow(n));
                assert!((rhs - oracle).norm() < 1e-10);
                let CircleDensity::Grid(p) = pf_iterate(&f, &map, n as usize).unwrap() else { unreachable!() };
                assert!((lhs - step_coefficient(p.values(), k)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn affine_fourier_against_quadrature() {
    let a = normalized(vec![0.0, 0.3, 0.7, 1.0], vec![(0.5, 1.0), (2.0, -1.0), (0.2, 0.9)]);
    let f: CircleDensity = a.clone().into();
    let n = 200_000;
    for k in [1i64, 2, -3, 7] {
        // Midpoint rule.
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let u = (j as f64 + 0.5) / n as f64;
            s += Complex64::from_polar(a.eval(u), -2.0 * PI * k as f64 * u);
        }
        s /= n as f64;
        assert!((s - f.fourier(k)).norm() < 1e-8, "k = {k}");
    }
}

#[test]
fn l1_is_bounded_by_fourier_tail() {
    // ||P^n f - 1||_1 <= ||P^n f - 1||_2 = (sum_{k != 0} |f^(k 2^n)|^2)^(1/2).
    let f: CircleDensity = trig_poly(1024, &[(1, 0.4, 0.0), (3, 0.0, 0.3), (6, 0.2, 0.1)]).into();
    let map = RadicMap::new(2).unwrap();
    let one: CircleDensity = GridDensity::uniform(1024).into();
    for n in 0..4u32 {
        let p = pf_iterate(&f, &map, n as usize).unwrap();
        let l1 = l1_distance(&p, &one).unwrap();
        let tail: f64 = (1..512i64).map(|k| 2.0 * f.fourier(k * 2i64.pow(n)).norm_sqr()).sum();
        assert!(l1 <= tail.sqrt() + 1e-12, "n = {n}: {l1} > {}", tail.sqrt());
    }
}

fn grid_density(cells: usize) -> impl Strategy<Value = GridDensity> {
    prop::collection::vec(0.01f64..5.0, cells).prop_map(|v| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        GridDensity::new(v.iter().map(|x| x / m).collect()).unwrap()
    })
}

/// Rescales affine pieces on `breaks` (ending at 1) to unit mass.
fn normalized(breaks: Vec<f64>, coeffs: Vec<(f64, f64)>) -> AffineDensity {
    let mass: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, (c0, c1))| {
            let (s, e) = (breaks[i], breaks[i + 1]);
            c0 * (e - s) + 0.5 * c1 * (e * e - s * s)
        })
        .sum();
    AffineDensity::new(breaks, coeffs.iter().map(|(a, b)| (a / mass, b / mass)).collect()).unwrap()
}

fn affine_density() -> impl Strategy<Value = AffineDensity> {
    (prop::collection::vec(0.01f64..1.0, 1..6), prop::collection::vec((0.1f64..3.0, -0.1f64..0.1), 6)).prop_map(|(cuts, vals)| {
        let total: f64 = cuts.iter().sum();
        let mut breaks = vec![0.0];
        let mut acc = 0.0;
        for c in &cuts[..cuts.len() - 1] {
            acc += c / total;
            breaks.push(acc);
        }
        breaks.push(1.0);
        let pieces = breaks.len() - 1;
        normalized(breaks, vals[..pieces].to_vec())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_mass_and_monotonicity(f in grid_density(36), g in grid_density(36), r in 2u32..=3) {
        let map = RadicMap::new(r).unwrap();
        let (f, g): (CircleDensity, CircleDensity) = (f.into(), g.into());
        let (pf, pg) = (pf_apply(&f, &map).unwrap(), pf_apply(&g, &map).unwrap());
        prop_assert!((pf.mass() - 1.0).abs() < 1e-12);
        let before = relative_entropy_classical(&f, &g).unwrap().value();
        let after = relative_entropy_classical(&pf, &pg).unwrap().value();
        prop_assert!(after <= before + 1e-12);
        prop_assert!(entropy(&pf) >= entropy(&f) - 1e-12);
        prop_assert!(l1_distance(&pf, &pg).unwrap() <= l1_distance(&f, &g).unwrap() + 1e-12);
    }

    #[test]
    fn affine_mass_and_monotonicity(f in affine_density(), g in affine_density(), r in 2u32..=5) {
        let map = RadicMap::new(r).unwrap();
        let (f, g): (CircleDensity, CircleDensity) = (f.into(), g.into());
        let (pf, pg) = (pf_apply(&f, &map).unwrap(), pf_apply(&g, &map).unwrap());
        prop_assert!((pf.mass() - 1.0).abs() < 1e-12);
        let before = relative_entropy_classical(&f, &g).unwrap().value();
        let after = relative_entropy_classical(&pf, &pg).unwrap().value();
        prop_assert!(after <= before + 1e-10, "{after} > {before}");
        prop_assert!(entropy(&pf) >= entropy(&f) - 1e-10);
        prop_assert!(l1_distance(&pf, &pg).unwrap() <= l1_distance(&f, &g).unwrap() + 1e-12);
    }
}
