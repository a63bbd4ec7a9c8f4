//! Binary PGM/PPM images of point clouds on the sphere.

use qmix_core::fractal::cube_face;
use qmix_core::pdp::Detector;

use crate::config::{Projection, RenderConfig, RenderMode, Zoom};
use crate::error::{CliError, Result};

pub const MIN_SIZE: u32 = 64;
pub const MAX_SIZE: u32 = 8192;

/// Colours of detectors 1 to 4.
const PALETTE: [[f64; 3]; 4] = [[255.0, 64.0, 64.0], [64.0, 220.0, 64.0], [64.0, 128.0, 255.0], [255.0, 210.0, 40.0]];

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.0 && n.is_finite()).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Orthographic camera looking at the sphere from direction `d`: screen
/// right `r` and up `u` with `r x u = d`.
#[derive(Debug, Clone, Copy)]
struct Camera {
    d: [f64; 3],
    r: [f64; 3],
    u: [f64; 3],
    min_cos: f64,
    half_width: f64,
}

impl Camera {
    fn new(d: [f64; 3], radius: f64) -> Self {
        // z is up unless the view is (nearly) along z, where y is up.
        let up = if d[2].abs() > 0.9 { [0.0, 1.0, 0.0] } else { [0.0, 0.0, 1.0] };
        let r = normalize(cross(up, d)).expect("up is not parallel to d");
        let u = cross(d, r);
        Camera {
            d,
            r,
            u,
            min_cos: radius.cos(),
            half_width: radius.sin(),
        }
    }

    /// Pixel of `p`, or `None` when outside the window or on the far side.
    fn pixel(&self, p: &[f64; 3], size: u32) -> Option<(u32, u32)> {
        if dot(p, &self.d) < self.min_cos {
            return None;
        }
        let sx = (dot(p, &self.r) / self.half_width + 1.0) * 0.5;
        let sy = (1.0 - dot(p, &self.u) / self.half_width) * 0.5;
        to_pixel(sx, sy, size, size)
    }
}

fn to_pixel(sx: f64, sy: f64, w: u32, h: u32) -> Option<(u32, u32)> {
    if !(0.0..=1.0).contains(&sx) || !(0.0..=1.0).contains(&sy) {
        return None;
    }
    let x = ((sx * w as f64) as u32).min(w - 1);
    let y = ((sy * h as f64) as u32).min(h - 1);
    Some((x, y))
}

/// Grid cell (column, row) of each face in the 4 x 3 net: `+z` above `+y`,
/// `-z` below it, and the belt `+x, +y, -x, -y`.
const NET: [(u32, u32); 6] = [(0, 1), (2, 1), (1, 1), (3, 1), (1, 0), (1, 2)];

/// Image geometry resolved from a render config.
#[derive(Debug, Clone, Copy)]
enum Layout {
    Ortho(Camera),
    Net { face: u32 },
}

/// Accumulated hits per pixel (and per detector for colour output).
#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
    pub hits: Vec<u64>,
    pub detector_hits: Vec<[u64; 4]>,
}

fn layout(spec: &RenderConfig) -> Result<(Layout, u32, u32)> {
    if !(MIN_SIZE..=MAX_SIZE).contains(&spec.size) {
        return Err(CliError::config(format!("size {} outside [{MIN_SIZE}, {MAX_SIZE}]", spec.size)));
    }
    let axis = |v: [f64; 3]| Camera::new(v, std::f64::consts::FRAC_PI_2);
    let cam = match spec.projection {
        Projection::PlusX => axis([1.0, 0.0, 0.0]),
        Projection::MinusX => axis([-1.0, 0.0, 0.0]),
        Projection::PlusY => axis([0.0, 1.0, 0.0]),
        Projection::MinusY => axis([0.0, -1.0, 0.0]),
        Projection::PlusZ => axis([0.0, 0.0, 1.0]),
        Projection::MinusZ => axis([0.0, 0.0, -1.0]),
        Projection::CubeNet => {
            if spec.zoom.is_some() {
                return Err(CliError::config("zoom needs an orthographic projection"));
            }
            let face = spec.size / 4;
            return Ok((Layout::Net { face }, 4 * face, 3 * face));
        }
    };
    let cam = match spec.zoom {
        None => cam,
        Some(Zoom { center, radius }) => {
            if !(radius > 0.0 && radius <= std::f64::consts::FRAC_PI_2) {
                return Err(CliError::config(format!("zoom radius {radius} outside (0, pi/2]")));
            }
            let d = normalize(center).ok_or_else(|| CliError::config("zoom center must be a non-zero vector"))?;
            Camera::new(d, radius)
        }
    };
    Ok((Layout::Ortho(cam), spec.size, spec.size))
}

/// Bins the points into pixels.
pub fn rasterize(points: &[[f64; 3]], detectors: &[Option<Detector>], spec: &RenderConfig) -> Result<Canvas> {
    if points.is_empty() {
        return Err(CliError::Core(qmix_core::Error::EmptyCloud));
    }
    let (lay, width, height) = layout(spec)?;
    let n = (width * height) as usize;
    let mut canvas = Canvas {
        width,
        height,
        hits: vec![0; n],
        detector_hits: vec![[0; 4]; n],
    };
    for (i, p) in points.iter().enumerate() {
        let px = match lay {
            Layout::Ortho(cam) => cam.pixel(p, width),
            Layout::Net { face } => {
                let (f, u, v) = cube_face(p);
                let (col, row) = NET[f as usize];
                to_pixel((u + 1.0) * 0.5, (1.0 - v) * 0.5, face, face).map(|(x, y)| (col * face + x, row * face + y))
            }
        };
        if let Some((x, y)) = px {
            let k = (y * width + x) as usize;
            canvas.hits[k] += 1;
            if let Some(Some(d)) = detectors.get(i) {
                canvas.detector_hits[k][d.index()] += 1;
            }
        }
    }
    Ok(canvas)
}

impl Canvas {
    fn brightness(&self) -> impl Iterator<Item = f64> + '_ {
        let max = self.hits.iter().copied().max().unwrap_or(0);
        let scale = if max > 0 { 1.0 / (max as f64).ln_1p() } else { 0.0 };
        self.hits.iter().map(move |&h| (h as f64).ln_1p() * scale)
    }

    /// Grey levels `255 log(1 + h) / log(1 + h_max)`.
    pub fn grey(&self) -> Vec<u8> {
        self.brightness().map(|b| (255.0 * b).round() as u8).collect()
    }

    /// Detector-weighted palette colour scaled by the grey level; points
    /// without a detector count as white.
    pub fn colour(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 * self.hits.len());
        for ((b, dh), &h) in self.brightness().zip(&self.detector_hits).zip(&self.hits) {
            let mut c = [0.0; 3];
            if h > 0 {
                let labelled: u64 = dh.iter().sum();
                for (k, &n) in dh.iter().enumerate() {
                    for j in 0..3 {
                        c[j] += n as f64 * PALETTE[k][j];
                    }
                }
                for cj in c.iter_mut() {
                    *cj = (*cj + (h - labelled) as f64 * 255.0) / h as f64;
                }
            }
            out.extend(c.iter().map(|v| (v * b).round() as u8));
        }
        out
    }

    /// Binary PNM bytes with `comments` (lines starting with `#`) in the header.
    pub fn encode(&self, mode: RenderMode, comments: &str) -> Vec<u8> {
        let (magic, body) = match mode {
            RenderMode::Hits => ("P5", self.grey()),
            RenderMode::Detectors => ("P6", self.colour()),
        };
        let mut out = format!("{magic}\n{comments}{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(body);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn spec(projection: Projection, size: u32) -> RenderConfig {
        RenderConfig {
            cloud: PathBuf::new(),
            projection,
            size,
            mode: RenderMode::Hits,
            zoom: None,
        }
    }

    #[test]
    fn axis_views_are_right_handed() {
        for d in [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
            let c = Camera::new(d, 1.0);
            let rxu = cross(c.r, c.u);
            assert!((0..3).all(|k| (rxu[k] - d[k]).abs() < 1e-15));
        }
    }

    #[test]
    fn front_hemisphere_only() {
        let c = rasterize(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], &[None, None], &spec(Projection::PlusZ, 64)).unwrap();
        assert_eq!(c.hits.iter().sum::<u64>(), 1);
        assert_eq!(c.hits[(32 * 64 + 32) as usize], 1);
    }

    #[test]
    fn net_places_every_face() {
        let pts = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
        let c = rasterize(&pts, &[None; 6], &spec(Projection::CubeNet, 256)).unwrap();
        assert_eq!((c.width, c.height), (256, 192));
        for (col, row) in NET {
            let k = ((row * 64 + 32) * 256 + col * 64 + 32) as usize;
            assert_eq!(c.hits[k], 1, "face at ({col}, {row})");
        }
    }

    #[test]
    fn size_bounds_and_empty_cloud() {
        assert!(rasterize(&[[0.0, 0.0, 1.0]], &[None], &spec(Projection::PlusZ, 63)).is_err());
        assert!(rasterize(&[[0.0, 0.0, 1.0]], &[None], &spec(Projection::PlusZ, 8193)).is_err());
        assert!(matches!(
            rasterize(&[], &[], &spec(Projection::PlusZ, 64)),
            Err(CliError::Core(qmix_core::Error::EmptyCloud))
        ));
    }

    #[test]
    fn zoom_window() {
        let mut s = spec(Projection::PlusZ, 64);
        s.zoom = Some(Zoom {
            center: [1.0, 0.0, 0.0],
            radius: 0.1,
        });
        let inside = [0.05f64.cos(), 0.05f64.sin(), 0.0];
        let outside = [0.2f64.cos(), 0.2f64.sin(), 0.0];
        let c = rasterize(&[inside, outside], &[None, None], &s).unwrap();
        assert_eq!(c.hits.iter().sum::<u64>(), 1);
    }

    #[test]
    fn header_layout() {
        let c = rasterize(&[[0.0, 0.0, 1.0]], &[None], &spec(Projection::PlusZ, 64)).unwrap();
        let bytes = c.encode(RenderMode::Hits, "# hello\n");
        assert!(bytes.starts_with(b"P5\n# hello\n64 64\n255\n"));
        assert_eq!(bytes.len(), "P5\n# hello\n64 64\n255\n".len() + 64 * 64);
        assert_eq!(c.grey().iter().filter(|&&g| g == 255).count(), 1);
    }
}
