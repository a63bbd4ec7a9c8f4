use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::EntropyValue;

/// Mass must equal 1 to this tolerance.
pub const MASS_TOL: f64 = 1e-12;
/// Values below this count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-14;

/// `S(u) = r u mod 1` on the circle `u = x / 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadicMap {
    r: u32,
}

impl RadicMap {
    pub fn new(r: u32) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r as f64,
                expected: "integer >= 2",
            });
        }
        Ok(RadicMap { r })
    }

    pub fn r(&self) -> u32 {
        self.r
    }
}

/// Piecewise-constant density: `values[j]` on `[j / M, (j + 1) / M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    values: Vec<f64>,
}

/// Piecewise-affine density `f(u) = c0 + c1 u` on `[breaks[i], breaks[i + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineDensity {
    breaks: Vec<f64>,
    coeffs: Vec<(f64, f64)>,
}

/// A probability density on the circle, parametrized by `u = x / 2 pi` in
/// `[0, 1)` so that `mu = du`.
#[derive(Debug, Clone, PartialEq)]
pub enum CircleDensity {
    Grid(GridDensity),
    Affine(AffineDensity),
}

fn check_mass(mass: f64) -> Result<()> {
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidDensity(format!("integral {mass} differs from 1")));
    }
    Ok(())
}

impl GridDensity {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDensity("empty grid".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDensity(format!("grid value {v}")));
        }
        let g = GridDensity { values };
        check_mass(g.mass())?;
        Ok(g)
    }

    /// Samples `f` at cell centres and rescales to unit mass.
    pub fn from_fn(cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = (0..cells).map(|j| f((j as f64 + 0.5) / cells as f64)).collect();
        let mass = values.iter().sum::<f64>() / cells as f64;
        if !(mass > 0.0) {
            return Err(Error::InvalidDensity(format!("sampled mass {mass}")));
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        GridDensity::new(values)
    }

    pub fn uniform(cells: usize) -> Self {
        GridDensity { values: alloc::vec![1.0; cells] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    /// Mean cell value.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Output cell `i` collects the input cells `floor(i / r) + j M / r`.
    fn pf(&self, r: u32) -> Result<Self> {
        let m = self.values.len();
        let r = r as usize;
        if !m.is_multiple_of(r) {
            return Err(Error::GridNotDivisible { cells: m, r: r as u32 });
        }
        let stride = m / r;
        let inv = 1.0 / r as f64;
        let values = (0..m)
            .map(|i| (0..r).map(|j| self.values[i / r + j * stride]).sum::<f64>() * inv)
            .collect();
        Ok(GridDensity { values })
    }

    /// `int e^{-2 pi i k u} f du`, exact for the step function.
    pub fn fourier(&self, k: i64) -> Complex64 {
        let m = self.values.len();
        if k == 0 {
            return Complex64::new(self.mass(), 0.0);
        }
        let step = -2.0 * PI * k as f64 / m as f64;
        // k mod M keeps the phase argument small.
        let kk = k.rem_euclid(m as i64) as u64;
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, v) in self.values.iter().enumerate() {
            let phase = -2.0 * PI * ((kk * j as u64) % m as u64) as f64 / m as f64;
            sum += Complex64::from_polar(*v, phase);
        }
        // int_0^{1/M} e^{-2 pi i k u} du
        let w = 2.0 * PI * k as f64;
        let cell = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, step)) / Complex64::new(0.0, w);
        sum * cell
    }
}

/// `int_s^e (c0 + c1 u) du`
fn affine_integral((c0, c1): (f64, f64), s: f64, e: f64) -> f64 {
    c0 * (e - s) + 0.5 * c1 * (e * e - s * s)
}

/// `int_s^e |c0 + c1 u| du`
fn affine_abs_integral((c0, c1): (f64, f64), s: f64, e: f64) -> f64 {
    if c1 != 0.0 {
        let root = -c0 / c1;
        if root > s && root < e {
            return affine_integral((c0, c1), s, root).abs() + affine_integral((c0, c1), root, e).abs();
        }
    }
    affine_integral((c0, c1), s, e).abs()
}

/// 20-point Gauss-Legendre nodes and weights on `[-1, 1]` (positive half).
const GL_NODES: [f64; 10] = [
    0.07652652113349734,
    0.2277858511416451,
    0.37370608871541955,
    0.5108670019508271,
    0.636053680726515,
    0.7463319064601508,
    0.8391169718222188,
    0.9122344282513258,
    0.9639719272779138,
    0.9931285991850949,
];
const GL_WEIGHTS: [f64; 10] = [
    0.15275338713072578,
    0.14917298647260366,
    0.14209610931838187,
    0.13168863844917653,
    0.11819453196151825,
    0.10193011981724026,
    0.08327674157670467,
    0.06267204833410944,
    0.04060142980038622,
    0.017614007139153273,
];

/// Composite Gauss-Legendre quadrature of `f` over `[s, e]` in `panels` panels.
fn gauss_legendre(s: f64, e: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (e - s) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = s + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            acc += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += acc * half;
    }
    total
}

fn eta(v: f64) -> f64 {
    if v > 0.0 {
        -v * libm::log(v)
    } else {
        0.0
    }
}

impl AffineDensity {
    /// `breaks` runs from 0 to 1 strictly increasing, with one `(c0, c1)` per
    /// piece. Values at both ends of every piece must be non-negative.
    pub fn new(breaks: Vec<f64>, coeffs: Vec<(f64, f64)>) -> Result<Self> {
        if breaks.len() != coeffs.len() + 1 || coeffs.is_empty() {
            return Err(Error::InvalidDensity("need one coefficient pair per piece".into()));
        }
        if breaks[0] != 0.0 || breaks[breaks.len() - 1] != 1.0 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidDensity("breakpoints must increase from 0 to 1".into()));
        }
        for (i, &(c0, c1)) in coeffs.iter().enumerate() {
            let lo = (c0 + c1 * breaks[i]).min(c0 + c1 * breaks[i + 1]);
            if !(lo >= -SUPPORT_TOL) {
                return Err(Error::InvalidDensity(format!("negative value {lo} on piece {i}")));
            }
        }
        let f = AffineDensity { breaks, coeffs };
        check_mass(f.mass())?;
        Ok(f)
    }

    /// A single affine piece `c0 + c1 u` on `[0, 1)`.
    pub fn line(c0: f64, c1: f64) -> Result<Self> {
        AffineDensity::new(alloc::vec![0.0, 1.0], alloc::vec![(c0, c1)])
    }

    pub fn uniform() -> Self {
        AffineDensity {
            breaks: alloc::vec![0.0, 1.0],
            coeffs: alloc::vec![(1.0, 0.0)],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    pub fn mass(&self) -> f64 {
        self.pieces().map(|(c, s, e)| affine_integral(c, s, e)).sum()
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (c0, c1) = self.coeffs[self.piece_of(u)];
        c0 + c1 * u
    }

    fn piece_of(&self, u: f64) -> usize {
        let k = self.breaks.partition_point(|b| *b <= u);
        k.clamp(1, self.coeffs.len()) - 1
    }

    fn pieces(&self) -> impl Iterator<Item = ((f64, f64), f64, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, c)| (*c, self.breaks[i], self.breaks[i + 1]))
    }

    /// `(Pf)(u) = (1/r) sum_j f((u + j) / r)`. The image of every breakpoint
    /// is `r b mod 1`, so the piece count never grows.
    fn pf(&self, r: u32) -> Self {
        let rf = r as f64;
        let mut breaks: Vec<f64> = self
            .breaks
            .iter()
            .map(|b| {
                let x = rf * b;
                x - libm::floor(x)
            })
            .collect();
        breaks.push(0.0);
        breaks.push(1.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut coeffs = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let (mut c0, mut c1) = (0.0, 0.0);
            for j in 0..r {
                let (a0, a1) = self.coeffs[self.piece_of((mid + j as f64) / rf)];
                c0 += a0 + a1 * j as f64 / rf;
                c1 += a1 / rf;
            }
            coeffs.push((c0 / rf, c1 / rf));
        }
        AffineDensity { breaks, coeffs }
    }

    /// Breakpoints of both densities merged.
    fn common_breaks(&self, other: &Self) -> Vec<f64> {
        let mut b: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn l1(&self, other: &Self) -> f64 {
        self.common_breaks(other)
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let (a0, a1) = self.coeffs[self.piece_of(mid)];
                let (b0, b1) = other.coeffs[other.piece_of(mid)];
                affine_abs_integral((a0 - b0, a1 - b1), w[0], w[1])
            })
            .sum()
    }

    /// `int eta(f)`: closed form on sloped pieces, quadrature on nearly flat
    /// ones where the closed form cancels.
    fn entropy(&self) -> f64 {
        self.pieces()
            .map(|((c0, c1), s, e)| {
                let (fs, fe) = (c0 + c1 * s, c0 + c1 * e);
                if (fe - fs).abs() > 1e-3 * fs.abs().max(fe.abs()) {
                    // d/dy (y^2 log y / 2 - y^2 / 4) = y log y
                    let anti = |y: f64| if y > 0.0 { 0.5 * y * y * libm::log(y) - 0.25 * y * y } else { 0.0 };
                    -(anti(fe) - anti(fs)) / c1
                } else {
                    gauss_legendre(s, e, 1, |u| eta(c0 + c1 * u))
                }
            })
            .sum()
    }

    fn relative_entropy(&self, g: &Self) -> EntropyValue {
        let mut total = 0.0;
        for w in self.common_breaks(g).windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let (a0, a1) = self.coeffs[self.piece_of(mid)];
            let (b0, b1) = g.coeffs[g.piece_of(mid)];
            for u in [w[0], w[1]] {
                if b0 + b1 * u < SUPPORT_TOL && a0 + a1 * u > SUPPORT_TOL {
                    return EntropyValue::Infinite;
                }
            }
            total += gauss_legendre(w[0], w[1], 4, |u| {
                let f = a0 + a1 * u;
                if f > 0.0 {
                    f * libm::log(f / (b0 + b1 * u))
                } else {
                    0.0
                }
            });
        }
        EntropyValue::Finite(total.max(0.0))
    }

    /// `int e^{-2 pi i k u} f du`, in closed form.
    pub fn fourier(&self, k: i64) -> Complex64 {
        if k == 0 {
            return Complex64::new(self.mass(), 0.0);
        }
        let w = 2.0 * PI * k as f64;
        let i = Complex64::new(0.0, 1.0);
        // Antiderivative of (c0 + c1 u) e^{-i w u}:
        // e^{-i w u} [ (c0 + c1 u) / (-i w) + c1 / w^2 ]
        let anti = |(c0, c1): (f64, f64), u: f64| Complex64::from_polar(1.0, -w * u) * ((c0 + c1 * u) / (-i * w) + c1 / (w * w));
        self.pieces().map(|(c, s, e)| anti(c, e) - anti(c, s)).sum()
    }
}

impl CircleDensity {
    pub fn mass(&self) -> f64 {
        match self {
            CircleDensity::Grid(g) => g.mass(),
            CircleDensity::Affine(a) => a.mass(),
        }
    }

    pub fn fourier(&self, k: i64) -> Complex64 {
        match self {
            CircleDensity::Grid(g) => g.fourier(k),
            CircleDensity::Affine(a) => a.fourier(k),
        }
    }

    /// The uniform density in the same representation (and grid size).
    pub fn uniform_like(&self) -> Self {
        match self {
            CircleDensity::Grid(g) => CircleDensity::Grid(GridDensity::uniform(g.cells())),
            CircleDensity::Affine(_) => CircleDensity::Affine(AffineDensity::uniform()),
        }
    }
}

impl From<GridDensity> for CircleDensity {
    fn from(g: GridDensity) -> Self {
        CircleDensity::Grid(g)
    }
}

impl From<AffineDensity> for CircleDensity {
    fn from(a: AffineDensity) -> Self {
        CircleDensity::Affine(a)
    }
}

/// One application of the Perron-Frobenius operator of `map`.
pub fn pf_apply(f: &CircleDensity, map: &RadicMap) -> Result<CircleDensity> {
    Ok(match f {
        CircleDensity::Grid(g) => CircleDensity::Grid(g.pf(map.r)?),
        CircleDensity::Affine(a) => CircleDensity::Affine(a.pf(map.r)),
    })
}

/// `n` applications of the Perron-Frobenius operator.
pub fn pf_iterate(f: &CircleDensity, map: &RadicMap, n: usize) -> Result<CircleDensity> {
    let mut g = f.clone();
    for _ in 0..n {
        g = pf_apply(&g, map)?;
    }
    Ok(g)
}

/// `int |f - g| du`, exact for both representations.
pub fn l1_distance(f: &CircleDensity, g: &CircleDensity) -> Result<f64> {
    match (f, g) {
        (CircleDensity::Grid(a), CircleDensity::Grid(b)) if a.cells() == b.cells() => {
            Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.cells() as f64)
        }
        (CircleDensity::Affine(a), CircleDensity::Affine(b)) => Ok(a.l1(b)),
        _ => Err(Error::IncompatibleRepresentations),
    }
}

/// `int -f log f du`; zero for the uniform density and negative otherwise.
pub fn entropy(f: &CircleDensity) -> f64 {
    match f {
        CircleDensity::Grid(g) => g.values.iter().map(|v| eta(*v)).sum::<f64>() / g.cells() as f64,
        CircleDensity::Affine(a) => a.entropy(),
    }
}

/// `int f log(f / g) du`, infinite when `f` has mass where `g` vanishes.
pub fn relative_entropy_classical(f: &CircleDensity, g: &CircleDensity) -> Result<EntropyValue> {
    match (f, g) {
        (CircleDensity::Grid(a), CircleDensity::Grid(b)) if a.cells() == b.cells() => {
            let mut total = 0.0;
            for (x, y) in a.values.iter().zip(&b.values) {
                if *x > SUPPORT_TOL {
                    if *y < SUPPORT_TOL {
                        return Ok(EntropyValue::Infinite);
                    }
                    total += x * libm::log(x / y);
                }
            }
            Ok(EntropyValue::Finite((total / a.cells() as f64).max(0.0)))
        }
        (CircleDensity::Affine(a), CircleDensity::Affine(b)) => Ok(a.relative_entropy(b)),
        _ => Err(Error::IncompatibleRepresentations),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_u() -> CircleDensity {
        AffineDensity::line(0.0, 2.0).unwrap().into()
    }

    #[test]
    fn uniform_is_stationary() {
        let r2 = RadicMap::new(2).unwrap();
        let g = CircleDensity::Grid(GridDensity::uniform(128));
        assert_eq!(pf_apply(&g, &r2).unwrap(), g);
        let a = CircleDensity::Affine(AffineDensity::uniform());
        assert_eq!(pf_apply(&a, &r2).unwrap(), a);
    }

    #[test]
    fn two_u_iterates_in_closed_form() {
        // P^n f = 2u / r^n + (r^n - 1) / r^n
        let map = RadicMap::new(2).unwrap();
        let p3 = pf_iterate(&two_u(), &map, 3).unwrap();
        let CircleDensity::Affine(a) = &p3 else { panic!() };
        for u in [0.0, 0.1, 0.5, 0.77, 0.999] {
            assert!((a.eval(u) - (2.0 * u / 8.0 + 7.0 / 8.0)).abs() < 1e-15);
        }
        let one = p3.uniform_like();
        assert_eq!(l1_distance(&p3, &one).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn l1_examples() {
        let one = CircleDensity::Affine(AffineDensity::uniform());
        assert_eq!(l1_distance(&two_u(), &two_u()).unwrap(), 0.0);
        assert!((l1_distance(&two_u(), &one).unwrap() - 0.5).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            let fk = CircleDensity::Affine(AffineDensity::line(1.0 - 1.0 / k as f64, 2.0 / k as f64).unwrap());
            let d = l1_distance(&fk, &one).unwrap();
            assert!(d < last);
            last = d;
        }
    }

    #[test]
    fn grid_requires_divisible_size() {
        let g = CircleDensity::Grid(GridDensity::uniform(100));
        assert!(matches!(pf_apply(&g, &RadicMap::new(3).unwrap()), Err(Error::GridNotDivisible { cells: 100, r: 3 })));
        assert!(RadicMap::new(1).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&GridDensity::uniform(64).into()), 0.0);
        let half: Vec<f64> = (0..64).map(|j| if j < 32 { 2.0 } else { 0.0 }).collect();
        let h = entropy(&GridDensity::new(half).unwrap().into());
        assert!((h + core::f64::consts::LN_2).abs() < 1e-15);
        assert!(entropy(&AffineDensity::uniform().into()).abs() < 1e-15);
        // int_0^1 -2u log 2u du = 1/2 - log 2
        assert!((entropy(&two_u()) - (0.5 - core::f64::consts::LN_2)).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_to_uniform_is_negative_entropy() {
        let one = CircleDensity::Affine(AffineDensity::uniform());
        let f = CircleDensity::Affine(AffineDensity::line(0.4, 1.2).unwrap());
        let h = relative_entropy_classical(&f, &one).unwrap().value();
        assert!((h + entropy(&f)).abs() < 1e-13, "{h} {}", entropy(&f));
        assert_eq!(relative_entropy_classical(&f, &f).unwrap(), EntropyValue::Finite(0.0));
        assert!(!relative_entropy_classical(&one, &two_u()).unwrap().is_finite());
    }

    #[test]
    fn fourier_of_affine_matches_grid_limit() {
        // f = 2u: fhat(k) = i / (pi k) for k != 0.
        let f = two_u();
        for k in [1i64, 2, -3] {
            let c = f.fourier(k);
            assert!((c - Complex64::new(0.0, 1.0 / (PI * k as f64))).norm() < 1e-15);
        }
    }

    #[test]
    fn grid_fourier_of_a_step() {
        let v: Vec<f64> = (0..8).map(|j| if j < 4 { 2.0 } else { 0.0 }).collect();
        let g = CircleDensity::Grid(GridDensity::new(v).unwrap());
        // 2 * int_0^{1/2} e^{-2 pi i u} du = 2 / (i pi)
        assert!((g.fourier(1) - Complex64::new(0.0, -2.0 / PI)).norm() < 1e-15);
        assert!(g.fourier(2).norm() < 1e-15);
    }

    #[test]
    fn invalid_densities_rejected() {
        assert!(GridDensity::new(vec![1.0, 2.0]).is_err());
        assert!(GridDensity::new(vec![2.0, -0.0, 0.5, 1.5]).is_ok());
        assert!(GridDensity::new(vec![2.5, -0.5]).is_err());
        assert!(AffineDensity::line(1.0, 1.0).is_err());
        assert!(AffineDensity::line(1.5, -3.0).is_err());
        assert!(AffineDensity::new(vec![0.0, 0.6, 0.5, 1.0], vec![(1.0, 0.0); 3]).is_err());
    }
}
