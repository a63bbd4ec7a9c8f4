//! One function per subcommand. Each writes its files into `out` and returns
//! their paths.

use std::path::{Path, PathBuf};

use qmix_core::classical::{
    l1_distance, lambda_classical, linear_probe, pf_apply, pf_iterate, AffineDensity, CircleDensity, GridDensity, RadicMap,
};
use qmix_core::exponent::{
    default_horizon, lambda_q_analytic, lambda_q_numeric_with, preset_reference, ExponentEstimate, ExponentOptions, ExponentOutcome,
    ProbeSet, Propagator,
};
use qmix_core::fractal::{cell_key, counts_from_sorted_keys, estimate_dimension, BoxCountResult, DimensionFit, PointCloud};
use qmix_core::lindblad::{analytic_bloch, analytic_evolve, build_model, evolve_with, EvolveOptions, ModelPreset};
use qmix_core::pdp::{chaos_game, path_seed, sample_path, state_at_time, PdpParams, PureSpinState};
use qmix_core::quantum::{trace_norm, BlochVector, DensityMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    ClassicalConfig, CloudSource, EvolveConfig, EvolveMethod, ExponentConfig, FractalConfig, ModelConfig, PdpConfig, ProbeConfig,
    PropagatorConfig, Provenance, ReferenceConfig, RenderConfig, RenderMode, Representation,
};
use crate::error::{CliError, Result};
use crate::output::{cloud_csv, csv_document, density_csv, json_document, path_jsonl, read_cloud, read_density, write_atomic};
use crate::render::rasterize;

fn write(out: &Path, name: &str, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<()> {
    let path = out.join(name);
    write_atomic(&path, bytes)?;
    files.push(path);
    Ok(())
}

/// Same step grid as the integrator: `n = ceil(t_end / dt)` equal steps.
fn step_grid(t_end: f64, dt: f64, record_every: usize) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::config(format!("dt = {dt} must be finite and > 0")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(CliError::config(format!("t_end = {t_end} must be finite and >= 0")));
    }
    let n = (t_end / dt * (1.0 - 1e-12)).ceil() as usize;
    let h = if n == 0 { dt } else { t_end / n as f64 };
    let every = record_every.max(1);
    let mut times = vec![0.0];
    for step in 1..=n {
        if step == n {
            times.push(t_end);
        } else if step % every == 0 {
            times.push(step as f64 * h);
        }
    }
    Ok(times)
}

/// Trajectory CSV: `t, x1, x2, x3, trace_distance` to the reference state.
pub fn cmd_evolve(cfg: &EvolveConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let preset = cfg.model.preset();
    preset.validate()?;
    let model = build_model(&preset)?;
    let rho0 = DensityMatrix::from_bloch(BlochVector(cfg.initial))?;
    let mut resolved = cfg.clone();
    let dt = *resolved.dt.get_or_insert(model.default_step());
    let reference = preset_reference(&preset)?;
    let (times, states) = match cfg.method {
        EvolveMethod::Rk4 => {
            let traj = evolve_with(
                &model,
                &rho0,
                &EvolveOptions {
                    t_end: cfg.t_end,
                    dt,
                    record_every: cfg.record_every,
                },
            )?;
            if traj.clamped_steps > 0 {
                log::warn!("positivity clamp applied on {} steps", traj.clamped_steps);
            }
            (traj.times, traj.states)
        }
        EvolveMethod::Exact => {
            let times = step_grid(cfg.t_end, dt, cfg.record_every)?;
            let states = times.iter().map(|&t| analytic_evolve(&preset, &rho0, t)).collect::<qmix_core::Result<Vec<_>>>()?;
            (times, states)
        }
    };
    let mut rows = Vec::with_capacity(times.len());
    for (t, rho) in times.iter().zip(&states) {
        let x = rho.to_bloch().0;
        let d = trace_norm(&(*rho.matrix() - *reference.matrix()))?;
        rows.push(vec![*t, x[0], x[1], x[2], d]);
    }
    let prov = Provenance::new("evolve", &resolved, None);
    let doc = csv_document(&prov, &["t", "x1", "x2", "x3", "trace_distance"], rows);
    let mut files = Vec::new();
    write(out, "trajectory.csv", doc.as_bytes(), &mut files)?;
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub lambda: f64,
    pub fit_window: (f64, f64),
    pub regression_residual: f64,
    pub probe_slopes: Vec<Option<f64>>,
    pub argmin: usize,
}

impl From<&ExponentEstimate> for EstimateReport {
    fn from(e: &ExponentEstimate) -> Self {
        EstimateReport {
            lambda: e.lambda,
            fit_window: e.fit_window,
            regression_residual: e.regression_residual,
            probe_slopes: e.probe_slopes.clone(),
            argmin: e.argmin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeReport {
    Mixing(EstimateReport),
    NotCompletelyMixing { horizon: f64, probe: usize, ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentRow {
    pub model: ModelConfig,
    pub t_max: f64,
    pub analytic: Option<f64>,
    pub numeric: OutcomeReport,
}

/// Runs the exponent estimate for one model.
pub fn exponent_row(model_cfg: &ModelConfig, cfg: &ExponentConfig) -> Result<ExponentRow> {
    let preset = model_cfg.preset();
    preset.validate()?;
    let model = build_model(&preset)?;
    let reference = match cfg.reference {
        ReferenceConfig::Stationary => preset_reference(&preset)?,
        ReferenceConfig::Bloch(x) => DensityMatrix::from_bloch(BlochVector(x))?,
    };
    let probes = ProbeSet::default_set(cfg.seed).excluding(&reference);
    let t_max = cfg.t_max.unwrap_or_else(|| default_horizon(Some(&preset), &model));
    let opts = ExponentOptions {
        t_max,
        samples: cfg.samples,
        propagator: match cfg.propagator {
            PropagatorConfig::Exact => Propagator::Exact,
            PropagatorConfig::Rk4 { dt } => Propagator::Integrator { dt },
        },
    };
    let numeric = match lambda_q_numeric_with(&model, &reference, &probes, &opts)? {
        ExponentOutcome::Mixing(e) => OutcomeReport::Mixing((&e).into()),
        ExponentOutcome::NotCompletelyMixing { horizon, probe, ratio } => OutcomeReport::NotCompletelyMixing { horizon, probe, ratio },
    };
    Ok(ExponentRow {
        model: *model_cfg,
        t_max,
        analytic: lambda_q_analytic(&preset).ok(),
        numeric,
    })
}

#[derive(Serialize)]
struct ExponentDoc {
    results: Vec<ExponentRow>,
}

pub fn cmd_exponent(cfg: &ExponentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let models = match &cfg.sweep {
        None => vec![cfg.model],
        Some(s) => s.values.iter().map(|v| cfg.model.with_parameter(&s.parameter, *v)).collect::<Result<Vec<_>>>()?,
    };
    let results = models.iter().map(|m| exponent_row(m, cfg)).collect::<Result<Vec<_>>>()?;
    let prov = Provenance::new("exponent", cfg, Some(cfg.seed));
    let mut files = Vec::new();
    write(out, "exponent.json", json_document(&prov, &ExponentDoc { results }).as_bytes(), &mut files)?;
    Ok(files)
}

/// Mean Bloch vector over `n_paths` paths, evaluated in parallel and summed
/// in path order.
pub fn ensemble_mean(params: &PdpParams, r0: &PureSpinState, t: f64, n_paths: usize, seed: u64) -> Result<[f64; 3]> {
    let vs = (0..n_paths)
        .into_par_iter()
        .map(|i| state_at_time(params, r0, t, path_seed(seed, i as u64)).map(|s| s.vector()))
        .collect::<qmix_core::Result<Vec<_>>>()?;
    let mut sum = [0.0; 3];
    for v in &vs {
        for k in 0..3 {
            sum[k] += v[k];
        }
    }
    let n = n_paths.max(1) as f64;
    Ok([sum[0] / n, sum[1] / n, sum[2] / n])
}

#[derive(Serialize)]
struct EnsembleDoc {
    t: f64,
    n_paths: usize,
    jump_rate: f64,
    mean: [f64; 3],
    master_equation: [f64; 3],
    max_deviation: f64,
}

#[derive(Serialize)]
struct CloudSummary {
    n_points: usize,
    burn_in: usize,
    max_renormalization: f64,
}

/// Chaos-game cloud (`cloud.csv`), a logged path (`path.jsonl`) and an
/// optional ensemble average (`ensemble.json`).
pub fn cmd_pdp(cfg: &PdpConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let prov = Provenance::new("pdp", cfg, Some(cfg.seed));
    let r0 = PureSpinState::new(cfg.initial)?;
    let params = PdpParams::new(cfg.omega, cfg.kappa, cfg.alpha).with_convention(cfg.convention.into());
    let mut files = Vec::new();
    let game = chaos_game(cfg.alpha, cfg.n_points, cfg.seed, cfg.burn_in, &r0)?;
    write(out, "cloud.csv", cloud_csv(&prov, &game.points, &game.detectors).as_bytes(), &mut files)?;
    let summary = CloudSummary {
        n_points: game.points.len(),
        burn_in: cfg.burn_in,
        max_renormalization: game.max_renormalization,
    };
    write(out, "cloud.json", json_document(&prov, &summary).as_bytes(), &mut files)?;
    if cfg.path_jumps > 0 {
        let path = sample_path(&params, &r0, cfg.path_jumps, cfg.seed)?;
        write(out, "path.jsonl", path_jsonl(&prov, &path).as_bytes(), &mut files)?;
    }
    if let Some(e) = &cfg.ensemble {
        let mean = ensemble_mean(&params, &r0, e.t, e.n_paths, cfg.seed)?;
        let preset = ModelPreset::Tetrahedron {
            kappa: cfg.kappa,
            alpha: cfg.alpha,
            omega: cfg.omega,
        };
        let master = analytic_bloch(&preset, &BlochVector(cfg.initial), e.t)?.0;
        let max_deviation = (0..3).map(|k| (mean[k] - master[k]).abs()).fold(0.0, f64::max);
        let doc = EnsembleDoc {
            t: e.t,
            n_paths: e.n_paths,
            jump_rate: params.rate(),
            mean,
            master_equation: master,
            max_deviation,
        };
        write(out, "ensemble.json", json_document(&prov, &doc).as_bytes(), &mut files)?;
    }
    Ok(files)
}

/// Box counts with the keys computed and sorted in parallel.
pub fn box_count_parallel(cloud: &PointCloud, levels: u32) -> Result<BoxCountResult> {
    if !(4..=qmix_core::fractal::MAX_LEVEL).contains(&levels) {
        return Err(qmix_core::Error::InvalidParameter {
            name: "levels",
            value: levels as f64,
            expected: "between 4 and 26",
        }
        .into());
    }
    let mut keys: Vec<u64> = cloud.points().par_iter().map(|p| cell_key(p, levels)).collect();
    keys.par_sort_unstable();
    Ok(counts_from_sorted_keys(&keys, levels)?)
}

#[derive(Serialize)]
struct BoxCountReport {
    levels: Vec<u32>,
    epsilons: Vec<f64>,
    counts: Vec<u64>,
    n_points: usize,
}

#[derive(Serialize)]
struct FitReport {
    dimension: f64,
    fit_range: (u32, u32),
    used_levels: Vec<u32>,
    rms_residual: f64,
    r_squared: f64,
}

impl From<&DimensionFit> for FitReport {
    fn from(f: &DimensionFit) -> Self {
        FitReport {
            dimension: f.dimension,
            fit_range: f.fit_range,
            used_levels: f.used_levels.clone(),
            rms_residual: f.rms_residual,
            r_squared: f.r_squared,
        }
    }
}

#[derive(Serialize)]
struct FractalDoc {
    box_count: BoxCountReport,
    fit: Option<FitReport>,
    fit_error: Option<String>,
}

/// Points and seed of a cloud source.
pub fn load_cloud(source: &CloudSource) -> Result<(Vec<[f64; 3]>, Option<u64>)> {
    Ok(match source {
        CloudSource::Cloud(path) => {
            let c = read_cloud(path)?;
            (c.points, c.seed)
        }
        CloudSource::ChaosGame(g) => {
            let r0 = PureSpinState::new(qmix_core::pdp::CHAOS_GAME_START)?;
            (chaos_game(g.alpha, g.n_points, g.seed, g.burn_in, &r0)?.points, Some(g.seed))
        }
    })
}

/// `boxcount.json`. A failed fit still writes the counts, then reports the
/// error.
pub fn cmd_fractal(cfg: &FractalConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (points, seed) = load_cloud(&cfg.source)?;
    let cloud = PointCloud::new(points)?;
    let counts = box_count_parallel(&cloud, cfg.levels)?;
    let fit = estimate_dimension(&counts);
    let doc = FractalDoc {
        fit: fit.as_ref().ok().map(FitReport::from),
        fit_error: fit.as_ref().err().map(|e| e.to_string()),
        box_count: BoxCountReport {
            levels: counts.levels,
            epsilons: counts.epsilons,
            counts: counts.counts,
            n_points: counts.n_points,
        },
    };
    let prov = Provenance::new("fractal", cfg, seed);
    let mut files = Vec::new();
    write(out, "boxcount.json", json_document(&prov, &doc).as_bytes(), &mut files)?;
    fit?;
    Ok(files)
}

fn build_probe(p: &ProbeConfig, repr: Representation, cells: usize) -> Result<CircleDensity> {
    let grid_only = |what: &str| CliError::config(format!("{what} probes need the grid representation"));
    Ok(match (p, repr) {
        (ProbeConfig::Linear(k), Representation::Affine) => linear_probe(*k)?,
        (ProbeConfig::Linear(k), Representation::Grid) => {
            if *k == 0 {
                return Err(CliError::config("linear probe index must be >= 1"));
            }
            let k = *k as f64;
            GridDensity::from_fn(cells, |u| 1.0 + (2.0 * u - 1.0) / k)?.into()
        }
        (ProbeConfig::Affine { breaks, coeffs }, Representation::Affine) => AffineDensity::new(breaks.clone(), coeffs.clone())?.into(),
        (ProbeConfig::Affine { .. }, Representation::Grid) => return Err(CliError::config("affine probes need the affine representation")),
        (ProbeConfig::Trig(terms), Representation::Grid) => GridDensity::from_fn(cells, |u| {
            1.0 + terms
                .iter()
                .map(|&(k, a, b)| {
                    let w = 2.0 * std::f64::consts::PI * k as f64 * u;
                    a * w.cos() + b * w.sin()
                })
                .sum::<f64>()
        })?
        .into(),
        (ProbeConfig::Csv(path), Representation::Grid) => {
            let g = read_density(path)?;
            if g.cells() != cells {
                return Err(CliError::config(format!("{} has {} cells, expected {cells}", path.display(), g.cells())));
            }
            g.into()
        }
        (ProbeConfig::Trig(_), Representation::Affine) => return Err(grid_only("trig")),
        (ProbeConfig::Csv(_), Representation::Affine) => return Err(grid_only("csv")),
    })
}

#[derive(Serialize)]
struct DistanceRow {
    n: usize,
    l1: Vec<f64>,
}

#[derive(Serialize)]
struct ClassicalDoc {
    log_r: f64,
    estimate: EstimateReport,
    relative_error: f64,
    distances_to_uniform: Vec<DistanceRow>,
}

#[derive(Serialize)]
struct AffineExport {
    breaks: Vec<f64>,
    coeffs: Vec<(f64, f64)>,
}

/// `classical.json`, and `density.csv` or `density.json` when exporting.
pub fn cmd_classical(cfg: &ClassicalConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let map = RadicMap::new(cfg.r)?;
    let mut resolved = cfg.clone();
    let cells = match cfg.representation {
        Representation::Grid => Some(*resolved.cells.get_or_insert((cfg.r as usize).pow(4) * 64)),
        Representation::Affine => {
            if cfg.cells.is_some() {
                return Err(CliError::config("cells applies to the grid representation only"));
            }
            None
        }
    };
    if cfg.probes.is_empty() {
        return Err(CliError::config("at least one probe is required"));
    }
    let probes = cfg
        .probes
        .iter()
        .map(|p| build_probe(p, cfg.representation, cells.unwrap_or(0)))
        .collect::<Result<Vec<_>>>()?;
    let one = probes[0].uniform_like();
    let est = lambda_classical(&one, &probes, &map, cfg.n_max)?;
    let mut distances = Vec::with_capacity(cfg.n_max + 1);
    let mut current = probes.clone();
    for n in 0..=cfg.n_max {
        if n > 0 {
            current = current.iter().map(|f| pf_apply(f, &map)).collect::<qmix_core::Result<Vec<_>>>()?;
        }
        let l1 = current.iter().map(|f| l1_distance(f, &one)).collect::<qmix_core::Result<Vec<_>>>()?;
        distances.push(DistanceRow { n, l1 });
    }
    let log_r = (cfg.r as f64).ln();
    let doc = ClassicalDoc {
        log_r,
        relative_error: (est.lambda - log_r).abs() / log_r,
        estimate: (&est).into(),
        distances_to_uniform: distances,
    };
    let prov = Provenance::new("classical", &resolved, None);
    let mut files = Vec::new();
    write(out, "classical.json", json_document(&prov, &doc).as_bytes(), &mut files)?;
    if let Some(e) = &cfg.export {
        let f = probes
            .get(e.probe)
            .ok_or_else(|| CliError::config(format!("export probe {} out of range", e.probe)))?;
        match pf_iterate(f, &map, e.n)? {
            CircleDensity::Grid(g) => write(out, "density.csv", density_csv(&prov, &g).as_bytes(), &mut files)?,
            CircleDensity::Affine(a) => {
                let doc = AffineExport {
                    breaks: a.breaks().to_vec(),
                    coeffs: a.coeffs().to_vec(),
                };
                write(out, "density.json", json_document(&prov, &doc).as_bytes(), &mut files)?
            }
        }
    }
    Ok(files)
}

/// `image.pgm` (hits) or `image.ppm` (detectors).
pub fn cmd_render(cfg: &RenderConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let cloud = read_cloud(&cfg.cloud)?;
    let canvas = rasterize(&cloud.points, &cloud.detectors, cfg)?;
    let prov = Provenance::new("render", cfg, cloud.seed);
    let bytes = canvas.encode(cfg.mode, &prov.comment_lines());
    let name = match cfg.mode {
        RenderMode::Hits => "image.pgm",
        RenderMode::Detectors => "image.ppm",
    };
    let mut files = Vec::new();
    write(out, name, &bytes, &mut files)?;
    Ok(files)
}
