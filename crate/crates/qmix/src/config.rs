//! Run configurations. Every command reads a JSON document (optionally empty),
//! applies `key.path=value` overrides, and rejects unknown keys.

use std::path::{Path, PathBuf};

use qmix_core::lindblad::ModelPreset;
use qmix_core::pdp::{JumpRateConvention, CHAOS_GAME_START};
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Tetrahedron {
        kappa: f64,
        alpha: f64,
        #[serde(default)]
        omega: f64,
    },
    Zeno {
        kappa: f64,
        omega: f64,
    },
    Fluorescence {
        rabi: f64,
        gamma: f64,
    },
    SigmaXConjugation,
}

impl ModelConfig {
    pub fn preset(&self) -> ModelPreset {
        match *self {
            ModelConfig::Tetrahedron { kappa, alpha, omega } => ModelPreset::Tetrahedron { kappa, alpha, omega },
            ModelConfig::Zeno { kappa, omega } => ModelPreset::Zeno { kappa, omega },
            ModelConfig::Fluorescence { rabi, gamma } => ModelPreset::Fluorescence { rabi, gamma },
            ModelConfig::SigmaXConjugation => ModelPreset::SigmaXConjugation,
        }
    }

    /// Copy with one numeric parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut v = serde_json::to_value(self).expect("model serializes");
        match v.get_mut(name) {
            Some(slot) if name != "preset" => *slot = value.into(),
            _ => return Err(CliError::config(format!("model {} has no parameter `{name}`", self.preset().name()))),
        }
        serde_json::from_value(v).map_err(|e| CliError::config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMethod {
    #[default]
    Rk4,
    Exact,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub model: ModelConfig,
    /// Initial Bloch vector.
    pub initial: [f64; 3],
    pub t_end: f64,
    /// Largest integrator step; the model's default step when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub method: EvolveMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PropagatorConfig {
    #[default]
    Exact,
    Rk4 { dt: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Model parameter to vary, e.g. `kappa`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReferenceConfig {
    /// The stationary state, or `I/2` when it is not unique.
    #[default]
    Stationary,
    Bloch([f64; 3]),
}

fn fit_samples() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Horizon; `20 / rate` per model when absent.
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "fit_samples")]
    pub samples: usize,
    #[serde(default)]
    pub propagator: PropagatorConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    /// Seed of the random probe states.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionConfig {
    #[default]
    Literal,
    Lindblad,
}

impl From<ConventionConfig> for JumpRateConvention {
    fn from(c: ConventionConfig) -> Self {
        match c {
            ConventionConfig::Literal => JumpRateConvention::Literal,
            ConventionConfig::Lindblad => JumpRateConvention::Lindblad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub t: f64,
    pub n_paths: usize,
}

fn unit_kappa() -> f64 {
    1.0
}

fn chaos_points() -> usize {
    1_000_000
}

fn burn_in() -> usize {
    100
}

fn chaos_start() -> [f64; 3] {
    CHAOS_GAME_START
}

fn path_jumps() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PdpConfig {
    pub alpha: f64,
    #[serde(default = "unit_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub convention: ConventionConfig,
    pub seed: u64,
    /// Chaos-game points (the free process, `omega = 0`, `kappa = 1`).
    #[serde(default = "chaos_points")]
    pub n_points: usize,
    #[serde(default = "burn_in")]
    pub burn_in: usize,
    /// Start of the chaos game and of the logged path.
    #[serde(default = "chaos_start")]
    pub initial: [f64; 3],
    /// Jumps in the logged path; no log when zero.
    #[serde(default = "path_jumps")]
    pub path_jumps: usize,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ChaosGameSource {
    pub alpha: f64,
    pub n_points: usize,
    pub seed: u64,
    #[serde(default = "burn_in")]
    pub burn_in: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum CloudSource {
    /// Point-cloud CSV as written by `pdp`.
    Cloud(PathBuf),
    ChaosGame(ChaosGameSource),
}

fn fractal_levels() -> u32 {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FractalConfig {
    pub source: CloudSource,
    #[serde(default = "fractal_levels")]
    pub levels: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    #[default]
    Affine,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbeConfig {
    /// `1 + (2u - 1) / k`.
    Linear(u32),
    /// `1 + sum a cos(2 pi k u) + b sin(2 pi k u)` over `[k, a, b]` triples (grid only).
    Trig(Vec<(u32, f64, f64)>),
    /// Affine pieces (affine only).
    Affine { breaks: Vec<f64>, coeffs: Vec<(f64, f64)> },
    /// CSV of `(x, f(x))` at the cell centres of `[0, 2 pi)` (grid only).
    Csv(PathBuf),
}

fn classical_n_max() -> usize {
    24
}

fn default_probes() -> Vec<ProbeConfig> {
    (1..=5).map(ProbeConfig::Linear).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    /// Index into `probes`.
    pub probe: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub r: u32,
    #[serde(default = "classical_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub representation: Representation,
    /// Grid size; `r^4 * 64` when absent.
    #[serde(default)]
    pub cells: Option<usize>,
    #[serde(default = "default_probes")]
    pub probes: Vec<ProbeConfig>,
    /// Writes `P^n` of one probe as a density CSV.
    #[serde(default)]
    pub export: Option<ExportConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
pub enum Projection {
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "-x")]
    MinusX,
    #[serde(rename = "+y")]
    PlusY,
    #[serde(rename = "-y")]
    MinusY,
    #[serde(rename = "+z")]
    #[default]
    PlusZ,
    #[serde(rename = "-z")]
    MinusZ,
    #[serde(rename = "cube-net")]
    CubeNet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum RenderMode {
    /// Grey levels from `log(1 + hits)` (PGM).
    #[default]
    Hits,
    /// Colour by the detector of each point (PPM).
    Detectors,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Zoom {
    /// View direction; normalized on use.
    pub center: [f64; 3],
    /// Angular radius of the window in radians, in `(0, pi/2]`.
    pub radius: f64,
}

fn render_size() -> u32 {
    512
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RenderConfig {
    pub cloud: PathBuf,
    /// Ignored when `zoom` is set.
    #[serde(default)]
    pub projection: Projection,
    #[serde(default = "render_size")]
    pub size: u32,
    #[serde(default)]
    pub mode: RenderMode,
    #[serde(default)]
    pub zoom: Option<Zoom>,
}

/// Applies `key.path=value` to `doc`. The value is parsed as JSON and taken
/// as a string when that fails.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override `{assignment}` is not of the form key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(CliError::config(format!("empty key in override `{assignment}`")));
        }
        if !slot.is_object() {
            if slot.is_null() {
                *slot = Value::Object(Default::default());
            } else {
                return Err(CliError::config(format!("`{}` is not an object", keys[..i].join("."))));
            }
        }
        let map = slot.as_object_mut().expect("checked above");
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        slot = map.entry(key.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

/// Reads the config document at `path` (or `{}`), applies `overrides` in
/// order and deserializes.
pub fn load<T: DeserializeOwned>(path: Option<&Path>, overrides: &[String]) -> Result<T> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    serde_json::from_value(doc).map_err(|e| CliError::config(e.to_string()))
}

/// Resolved config with its hash, as embedded in every output.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: &'static str,
    pub config: Value,
    pub sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new<T: Serialize>(command: &'static str, config: &T, seed: Option<u64>) -> Self {
        let config = serde_json::to_value(config).expect("configs serialize");
        let sha256 = sha256_hex(config.to_string().as_bytes());
        Provenance {
            command,
            config,
            sha256,
            seed,
        }
    }

    /// `# key: value` lines for text formats.
    pub fn comment_lines(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# qmix {}\n# config: {}\n# config_sha256: {}\n# seed: {}\n",
            self.command, self.config, self.sha256, seed
        )
    }

    /// Fields to merge into JSON outputs.
    pub fn json_fields(&self) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), self.command.into());
        m.insert("config".into(), self.config.clone());
        m.insert("config_sha256".into(), self.sha256.clone().into());
        m.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        m
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON schema of a command's config.
pub fn schema(command: &str) -> Option<Value> {
    let s = match command {
        "evolve" => schemars::schema_for!(EvolveConfig),
        "exponent" => schemars::schema_for!(ExponentConfig),
        "pdp" => schemars::schema_for!(PdpConfig),
        "fractal" => schemars::schema_for!(FractalConfig),
        "classical" => schemars::schema_for!(ClassicalConfig),
        "render" => schemars::schema_for!(RenderConfig),
        _ => return None,
    };
    Some(serde_json::to_value(s).expect("schema serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = load::<EvolveConfig>(None, &["model.preset=zeno".into(), "model.kappa=1".into(), "model.omega=1".into(), "bogus=1".into()]);
        assert!(matches!(err, Err(CliError::Config(m)) if m.contains("bogus")));
        let err = load::<EvolveConfig>(
            None,
            &[
                "model.preset=zeno".into(),
                "model.kappa=1".into(),
                "model.omega=1".into(),
                "model.alpha=1".into(),
                "initial=[0,0,1]".into(),
                "t_end=1".into(),
            ],
        );
        assert!(matches!(err, Err(CliError::Config(m)) if m.contains("alpha")));
    }

    #[test]
    fn overrides_build_nested_documents() {
        let cfg: EvolveConfig = load(
            None,
            &[
                "model.preset=tetrahedron".into(),
                "model.kappa=1".into(),
                "model.alpha=0.5".into(),
                "initial=[0,0,1]".into(),
                "t_end=2".into(),
                "method=exact".into(),
            ],
        )
        .unwrap();
        assert_eq!(
            cfg.model,
            ModelConfig::Tetrahedron {
                kappa: 1.0,
                alpha: 0.5,
                omega: 0.0
            }
        );
        assert_eq!(cfg.method, EvolveMethod::Exact);
        assert_eq!(cfg.record_every, 1);
    }

    #[test]
    fn hash_depends_on_resolved_values_only() {
        let a: PdpConfig = load(None, &["alpha=0.7".into(), "seed=42".into()]).unwrap();
        let b: PdpConfig = load(None, &["seed=42".into(), "alpha=0.7".into(), "kappa=1".into()]).unwrap();
        assert_eq!(Provenance::new("pdp", &a, Some(42)).sha256, Provenance::new("pdp", &b, Some(42)).sha256);
        let c: PdpConfig = load(None, &["alpha=0.7".into(), "seed=43".into()]).unwrap();
        assert_ne!(Provenance::new("pdp", &a, Some(42)).sha256, Provenance::new("pdp", &c, Some(43)).sha256);
    }

    #[test]
    fn known_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn sweep_parameter_replacement() {
        let m = ModelConfig::Zeno { kappa: 1.0, omega: 1.0 };
        assert_eq!(m.with_parameter("kappa", 4.0).unwrap(), ModelConfig::Zeno { kappa: 4.0, omega: 1.0 });
        assert!(m.with_parameter("alpha", 4.0).is_err());
        assert!(m.with_parameter("preset", 4.0).is_err());
    }

    #[test]
    fn schemas_exist() {
        for c in ["evolve", "exponent", "pdp", "fractal", "classical", "render"] {
            assert!(schema(c).is_some(), "{c}");
        }
        assert!(schema("repro").is_none());
    }
}
