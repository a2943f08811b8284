//! Experiment configuration: one JSON file per experiment, with dotted
//! `key=value` overrides applied on top.

use std::fmt;
use std::path::{Path, PathBuf};

use levy_krylov::drift::{DriftConfig, TestFunctionConfig};
use levy_krylov::krylov::ResolventGrid;
use levy_krylov::levy::{DyadicGrid, LevyModelConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub experiment_id: String,
    pub model: LevyModelConfig,
    #[serde(default = "default_drift")]
    pub drift: DriftConfig,
    #[serde(default)]
    pub test_functions: Vec<NamedTestFunction>,
    #[serde(default)]
    pub lambda: LambdaPolicy,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub condition: DyadicGrid,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub krylov: KrylovSection,
    #[serde(default)]
    pub resolvent: ResolventSection,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_id() -> String {
    "experiment".into()
}

fn default_drift() -> DriftConfig {
    DriftConfig::Constant { value: 0.0 }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTestFunction {
    pub id: String,
    pub f: TestFunctionConfig,
}

/// How `λ` is chosen for the occupation estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaPolicy {
    /// `max(λ₀, floor)`.
    AutoLambda0Or { floor: f64 },
    /// Exactly `value`; refused when below `λ₀`.
    Fixed { value: f64 },
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        LambdaPolicy::AutoLambda0Or { floor: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub x0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            x0: 0.0,
            t_end: 1.0,
            dt: 1e-3,
            n_paths: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    /// Horizon of the characteristic-function check.
    pub t: f64,
    pub n_paths: usize,
    pub xi_grid: Vec<f64>,
    /// Number of paths written to `levy_paths.csv` and `paths.csv`.
    pub n_written: usize,
}

impl Default for SampleSection {
    fn default() -> Self {
        Self {
            t: 1.0,
            n_paths: 20_000,
            xi_grid: (-10..=10).map(|k| k as f64 * 0.5).collect(),
            n_written: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrylovSection {
    pub t0: f64,
    pub x0: f64,
    /// Run the built-in ten-function sweep in addition to `test_functions`.
    pub builtin_sweep: bool,
    pub truncation_tol: f64,
    /// `(m, t)` of the localized estimate; skipped when absent.
    pub local: Option<LocalSection>,
}

impl Default for KrylovSection {
    fn default() -> Self {
        Self {
            t0: 0.0,
            x0: 0.0,
            builtin_sweep: false,
            truncation_tol: 0.01,
            local: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSection {
    pub m: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventSection {
    /// Explicit grid; otherwise built from the padding factors below.
    pub grid: Option<ResolventGrid>,
    pub pad_t: f64,
    pub pad_x: f64,
    pub nt: usize,
    pub nx: usize,
    /// `(t, x)` points where the field is compared with Monte Carlo.
    pub probes: Vec<(f64, f64)>,
    /// Paths of the cross-check; 0 skips it.
    pub cross_check_paths: usize,
    /// Relative tolerance of the cross-check.
    pub rel_tol: f64,
}

impl Default for ResolventSection {
    fn default() -> Self {
        Self {
            grid: None,
            pad_t: 2.5,
            pad_x: 4.0,
            nt: 512,
            nx: 512,
            probes: Vec::new(),
            cross_check_paths: 0,
            rel_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderSection {
    pub eps: Vec<f64>,
    pub eps_tol: f64,
    pub l_grid: Vec<f64>,
    pub r_ladder: Vec<f64>,
    /// Required ratio of the first to the last median sup-gap.
    pub min_gap_reduction: f64,
    /// Tail probability that some level of the Aldous table must undercut.
    pub tail_level: f64,
}

impl Default for LadderSection {
    fn default() -> Self {
        Self {
            eps: vec![0.5, 0.25, 0.125, 0.0625],
            eps_tol: 0.05,
            l_grid: (0..7).map(|k| f64::from(1u32 << k)).collect(),
            r_ladder: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            min_gap_reduction: 2.0,
            tail_level: 0.05,
        }
    }
}

/// A configuration problem, anchored to a file position or an override.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn json_error(path: &str, e: &serde_json::Error) -> ConfigError {
    // serde_json appends " at line L column C"; the location moves to the front
    let full = e.to_string();
    let message = match full.rfind(" at line ") {
        Some(i) => full[..i].to_string(),
        None => full,
    };
    ConfigError {
        location: format!("{path}:{}:{}", e.line(), e.column()),
        message,
    }
}

impl ExperimentConfig {
    /// Parses `text`; errors carry `origin:LINE:COL`.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| json_error(origin, &e))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            location: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Applies `key=value` overrides. Keys are dotted paths into the JSON
    /// form (array elements by index); values are parsed as JSON and fall
    /// back to plain strings.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, ConfigError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut tree = serde_json::to_value(self).expect("config serializes");
        for item in overrides {
            let anchor = |message: String| ConfigError {
                location: format!("--set {item}"),
                message,
            };
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| anchor("expected key=value".into()))?;
            let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut tree, key, value).map_err(anchor)?;
        }
        serde_json::from_value(tree).map_err(|e| ConfigError {
            location: format!("--set {}", overrides.join(" --set ")),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn set_path(tree: &mut Value, key: &str, value: Value) -> Result<(), String> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("malformed key `{key}`"));
    }
    let mut node = tree;
    for (depth, part) in parts.iter().enumerate() {
        let last = depth + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| format!("`{part}` is not an index into an array"))?;
                let len = items.len();
                let slot = items
                    .get_mut(i)
                    .ok_or_else(|| format!("index {i} out of range (length {len})"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Null => {
                *node = Value::Object(Default::default());
                let Value::Object(map) = node else { unreachable!() };
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            _ => return Err(format!("`{}` is not a table", parts[..depth].join("."))),
        };
    }
    Ok(())
}
