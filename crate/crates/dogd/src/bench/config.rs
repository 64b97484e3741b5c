//! Flat key-value experiment configuration.
//!
//! A config file is plain text, one `key = value` per line, with `#`
//! comments and blank lines ignored:
//!
//! ```text
//! # radial benchmark, small horizon
//! experiment = radial
//! horizon = 2000
//! delays = 1,5,10
//! reps = 5
//! seed = 7
//! ```
//!
//! Every key must be on the documented list and must be consumed by the
//! chosen experiment; anything else is rejected so that a config never
//! silently under-specifies a run.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Experiment identifiers understood by the harness.
pub const EXPERIMENT_IDS: &[&str] = &[
    "radial",
    "glm",
    "glm-vt-sweep",
    "quadfrac",
    "quadfrac-bandit",
    "high-delay-radial",
    "custom",
];

/// Keys meaningful for any experiment.
const GENERIC_KEYS: &[&str] = &[
    "experiment",
    "horizon",
    "dimension",
    "radius",
    "delays",
    "reps",
    "seed",
    "threshold",
    "stride",
    "out_dir",
    "window",
    "factor",
];

/// Keys accepted per experiment family, beyond the generic ones.
fn family_keys(experiment: &str) -> Result<&'static [&'static str]> {
    Ok(match experiment {
        "radial" | "high-delay-radial" => &["amplitude_cap", "frequency_cap"],
        "glm" => &["samples", "drift_scale", "drift_exponent"],
        "glm-vt-sweep" => &["samples", "drift_scale", "drift_exponents"],
        "quadfrac" => &["drift_scale", "subsolver_tol"],
        "quadfrac-bandit" => &["drift_scale", "subsolver_tol", "h_exponents", "h_scale"],
        "custom" => &[
            "family",
            "samples",
            "drift_scale",
            "drift_exponent",
            "drift_exponents",
            "subsolver_tol",
            "h_exponents",
            "h_scale",
            "amplitude_cap",
            "frequency_cap",
        ],
        other => {
            return Err(Error::Config(format!(
                "unknown experiment '{other}' (expected one of {})",
                EXPERIMENT_IDS.join(", ")
            )))
        }
    })
}

/// A parsed configuration: the experiment id plus every override present.
///
/// Fields left `None` fall back to the experiment preset when the plan is
/// built.
#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    /// Which experiment to run.
    pub experiment: String,
    /// Loss family for `experiment = custom`.
    pub family: Option<String>,
    /// Overridable knobs.
    pub overrides: Overrides,
}

/// Every knob a config file or command line may override.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Query rounds `T`.
    pub horizon: Option<u64>,
    /// Ambient dimension `p`.
    pub dimension: Option<usize>,
    /// Feasible-set radius `R`.
    pub radius: Option<f64>,
    /// Delay levels, one arm per entry (where the experiment is keyed by
    /// delay).
    pub delays: Option<Vec<u32>>,
    /// Repetitions.
    pub reps: Option<u32>,
    /// Base seed; repetition `r` uses `seed + r`.
    pub seed: Option<u64>,
    /// Threshold for the crossing-iteration statistic.
    pub threshold: Option<f64>,
    /// Record subsampling stride.
    pub stride: Option<u64>,
    /// Output directory for `run`.
    pub out_dir: Option<String>,
    /// Trailing smoothing window for the gap series.
    pub window: Option<usize>,
    /// Safety factor of the threshold step-size rule.
    pub factor: Option<f64>,
    /// Samples per round (GLM).
    pub samples: Option<usize>,
    /// Comparator drift scale.
    pub drift_scale: Option<f64>,
    /// Comparator drift exponent (single-path GLM).
    pub drift_exponent: Option<f64>,
    /// Comparator drift exponents, one arm each (sweep).
    pub drift_exponents: Option<Vec<f64>>,
    /// Finite-difference step exponents, one bandit arm each.
    pub h_exponents: Option<Vec<f64>>,
    /// Finite-difference step scale.
    pub h_scale: Option<f64>,
    /// Subsolver relative tolerance.
    pub subsolver_tol: Option<f64>,
    /// Radial amplitude cap.
    pub amplitude_cap: Option<f64>,
    /// Radial frequency cap.
    pub frequency_cap: Option<f64>,
}

impl Overrides {
    /// Layers `other` on top of `self`: anything set in `other` wins.
    pub fn layered_under(&self, other: &Overrides) -> Overrides {
        macro_rules! pick {
            ($field:ident) => {
                other.$field.clone().or_else(|| self.$field.clone())
            };
        }
        Overrides {
            horizon: pick!(horizon),
            dimension: pick!(dimension),
            radius: pick!(radius),
            delays: pick!(delays),
            reps: pick!(reps),
            seed: pick!(seed),
            threshold: pick!(threshold),
            stride: pick!(stride),
            out_dir: pick!(out_dir),
            window: pick!(window),
            factor: pick!(factor),
            samples: pick!(samples),
            drift_scale: pick!(drift_scale),
            drift_exponent: pick!(drift_exponent),
            drift_exponents: pick!(drift_exponents),
            h_exponents: pick!(h_exponents),
            h_scale: pick!(h_scale),
            subsolver_tol: pick!(subsolver_tol),
            amplitude_cap: pick!(amplitude_cap),
            frequency_cap: pick!(frequency_cap),
        }
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| {
        Error::Config(format!(
            "key '{key}': cannot parse '{value}' as {}",
            std::any::type_name::<T>()
        ))
    })
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Config(format!("key '{key}': empty list")));
    }
    items
        .into_iter()
        .map(|item| parse_scalar(key, item))
        .collect()
}

/// Parses config text into key-value pairs, rejecting duplicates and
/// malformed lines.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected 'key = value', got '{raw_line}'",
                index + 1
            ))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config(format!(
                "line {}: empty key or value",
                index + 1
            )));
        }
        if pairs.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key '{key}'",
                index + 1
            )));
        }
    }
    Ok(pairs)
}

/// Parses configuration text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let pairs = parse_pairs(text)?;
    let experiment = pairs
        .get("experiment")
        .ok_or_else(|| Error::Config("missing required key 'experiment'".into()))?
        .clone();
    let allowed = family_keys(&experiment)?;
    for key in pairs.keys() {
        if !GENERIC_KEYS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "key '{key}' is not used by experiment '{experiment}'"
            )));
        }
    }
    let get = |key: &str| pairs.get(key).map(String::as_str);
    let mut overrides = Overrides::default();
    if let Some(v) = get("horizon") {
        overrides.horizon = Some(parse_scalar("horizon", v)?);
    }
    if let Some(v) = get("dimension") {
        overrides.dimension = Some(parse_scalar("dimension", v)?);
    }
    if let Some(v) = get("radius") {
        overrides.radius = Some(parse_scalar("radius", v)?);
    }
    if let Some(v) = get("delays") {
        overrides.delays = Some(parse_list("delays", v)?);
    }
    if let Some(v) = get("reps") {
        overrides.reps = Some(parse_scalar("reps", v)?);
    }
    if let Some(v) = get("seed") {
        overrides.seed = Some(parse_scalar("seed", v)?);
    }
    if let Some(v) = get("threshold") {
        overrides.threshold = Some(parse_scalar("threshold", v)?);
    }
    if let Some(v) = get("stride") {
        overrides.stride = Some(parse_scalar("stride", v)?);
    }
    if let Some(v) = get("out_dir") {
        overrides.out_dir = Some(v.to_string());
    }
    if let Some(v) = get("window") {
        overrides.window = Some(parse_scalar("window", v)?);
    }
    if let Some(v) = get("factor") {
        overrides.factor = Some(parse_scalar("factor", v)?);
    }
    if let Some(v) = get("samples") {
        overrides.samples = Some(parse_scalar("samples", v)?);
    }
    if let Some(v) = get("drift_scale") {
        overrides.drift_scale = Some(parse_scalar("drift_scale", v)?);
    }
    if let Some(v) = get("drift_exponent") {
        overrides.drift_exponent = Some(parse_scalar("drift_exponent", v)?);
    }
    if let Some(v) = get("drift_exponents") {
        overrides.drift_exponents = Some(parse_list("drift_exponents", v)?);
    }
    if let Some(v) = get("h_exponents") {
        overrides.h_exponents = Some(parse_list("h_exponents", v)?);
    }
    if let Some(v) = get("h_scale") {
        overrides.h_scale = Some(parse_scalar("h_scale", v)?);
    }
    if let Some(v) = get("subsolver_tol") {
        overrides.subsolver_tol = Some(parse_scalar("subsolver_tol", v)?);
    }
    if let Some(v) = get("amplitude_cap") {
        overrides.amplitude_cap = Some(parse_scalar("amplitude_cap", v)?);
    }
    if let Some(v) = get("frequency_cap") {
        overrides.frequency_cap = Some(parse_scalar("frequency_cap", v)?);
    }
    Ok(ExperimentConfig {
        experiment,
        family: pairs.get("family").cloned(),
        overrides,
    })
}

/// Reads and parses a configuration file.
pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
