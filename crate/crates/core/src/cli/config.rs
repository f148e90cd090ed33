use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::SystemParams;

/// Environment variable that redirects output files into another directory.
pub const OUTPUT_DIR_ENV: &str = "GAUSSYNC_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Xi,
    G,
    Gamma,
    Nbar2,
    /// δ = ω₁ − ω₂, applied by moving ω₂.
    Delta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Xi => "xi",
            SweepAxis::G => "g",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Nbar2 => "nbar2",
            SweepAxis::Delta => "delta",
        }
    }

    pub fn apply(self, mut p: SystemParams, value: f64) -> SystemParams {
        match self {
            SweepAxis::Xi => p.xi = value,
            SweepAxis::G => p.g = value,
            SweepAxis::Gamma => p.gamma = value,
            SweepAxis::Nbar2 => p.nbar2 = value,
            SweepAxis::Delta => p.omega2 = p.omega1 - value,
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// A second, discrete axis: one block of rows per value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialCovariance {
    #[default]
    Vacuum,
    /// Thermal at the bath occupations.
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Defaults to 200 steps per period of ω₁.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub stride: usize,
    /// Record violations of the uncertainty relation instead of aborting.
    pub allow_unphysical: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: 100.0 * 2.0 * std::f64::consts::PI,
            stride: 10,
            allow_unphysical: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// (Re, Im) of ⟨a₁⟩(0).
    pub alpha1: [f64; 2],
    /// (Re, Im) of ⟨a₂⟩(0).
    pub alpha2: [f64; 2],
    pub covariance: InitialCovariance,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            alpha1: [1.0, 0.0],
            alpha2: [0.5, 0.0],
            covariance: InitialCovariance::Vacuum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub corpus_size: usize,
    /// Mutation switch: negate the diffusion matrix in the steady-state checks.
    pub flip_diffusion_sign: bool,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            corpus_size: 1000,
            flip_diffusion_sign: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    pub sweep: Option<SweepConfig>,
    pub series: Option<SeriesConfig>,
    pub integrator: IntegratorConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    pub seed: u64,
    pub validate: ValidateConfig,
}

impl RunConfig {
    /// Parse JSON text, apply `key=value` overrides (dotted paths, JSON or bare
    /// string values) and validate.
    pub fn from_json(text: Option<&str>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value = match text {
            Some(t) => {
                serde_json::from_str::<Value>(t).map_err(|e| ConfigError::Parse(e.to_string()))?
            }
            None => Value::Object(Default::default()),
        };
        // Fill defaults first so overrides can address nested fields.
        let base: RunConfig =
            serde_json::from_value(value.clone()).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut full = serde_json::to_value(&base).expect("config serializes");
        merge(&mut full, &value);
        value = full;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?),
            None => None,
        };
        Self::from_json(text.as_deref(), overrides)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        crate::model::validate_params(self.params)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(s) = &self.sweep {
            if s.count < 2 {
                return Err(ConfigError::Invalid("sweep.count must be >= 2".into()));
            }
            if s.start == s.stop {
                return Err(ConfigError::Invalid(
                    "sweep.start must differ from sweep.stop".into(),
                ));
            }
            if !(s.start.is_finite() && s.stop.is_finite()) {
                return Err(ConfigError::Invalid("sweep bounds must be finite".into()));
            }
        }
        if let Some(s) = &self.series {
            if s.values.is_empty() {
                return Err(ConfigError::Invalid(
                    "series.values must not be empty".into(),
                ));
            }
        }
        for (series, sweep) in self.points() {
            let p = self.point_params(series, sweep);
            crate::model::validate_params(p).map_err(|e| {
                ConfigError::Invalid(format!(
                    "sweep point {}: {e}",
                    self.describe_point(series, sweep)
                ))
            })?;
        }
        if let Some(dt) = self.integrator.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ConfigError::Invalid("integrator.dt must be > 0".into()));
            }
        }
        if !(self.integrator.t_end >= 0.0 && self.integrator.t_end.is_finite()) {
            return Err(ConfigError::Invalid("integrator.t_end must be >= 0".into()));
        }
        if self.integrator.stride == 0 {
            return Err(ConfigError::Invalid(
                "integrator.stride must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// (series value, sweep value) pairs in output order.
    pub fn points(&self) -> Vec<(Option<f64>, Option<f64>)> {
        let series: Vec<Option<f64>> = match &self.series {
            Some(s) => s.values.iter().map(|v| Some(*v)).collect(),
            None => vec![None],
        };
        let sweep: Vec<Option<f64>> = match &self.sweep {
            Some(s) => s.values().into_iter().map(Some).collect(),
            None => vec![None],
        };
        series
            .iter()
            .flat_map(|a| sweep.iter().map(move |b| (*a, *b)))
            .collect()
    }

    pub fn point_params(&self, series: Option<f64>, sweep: Option<f64>) -> SystemParams {
        let mut p = self.params;
        if let (Some(s), Some(v)) = (&self.series, series) {
            p = s.axis.apply(p, v);
        }
        if let (Some(s), Some(v)) = (&self.sweep, sweep) {
            p = s.axis.apply(p, v);
        }
        p
    }

    fn describe_point(&self, series: Option<f64>, sweep: Option<f64>) -> String {
        let mut parts = Vec::new();
        if let (Some(s), Some(v)) = (&self.series, series) {
            parts.push(format!("{}={v}", s.axis.name()));
        }
        if let (Some(s), Some(v)) = (&self.sweep, sweep) {
            parts.push(format!("{}={v}", s.axis.name()));
        }
        parts.join(",")
    }

    /// Output path after applying the directory override, if any.
    pub fn resolved_output(&self) -> Option<PathBuf> {
        let path = PathBuf::from(self.output.path.as_ref()?);
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => {
                Some(PathBuf::from(dir).join(path.file_name().unwrap_or(path.as_os_str())))
            }
            _ => Some(path),
        }
    }

    /// Compact JSON echo of the resolved configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn apply_override(root: &mut Value, entry: &str) -> Result<(), ConfigError> {
    let (key, raw) = entry
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(entry.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::Override(entry.to_string()));
    }
    let parsed =
        serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        let map = node.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
