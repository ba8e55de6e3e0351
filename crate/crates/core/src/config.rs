//! Experiment configuration read from TOML. Command-line overrides are
//! applied on top with [`Overrides`]; precedence is flag, then file, then
//! default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::testfn::TestFunction;
use crate::walk::Direction;

/// Every estimator the runner knows.
pub const ESTIMATORS: &[&str] = &[
    "lyapunov",
    "center",
    "harmonic",
    "variance",
    "survival",
    "rho",
    "density",
    "harmonicity",
    "reversal",
    "translation",
    "tail",
    "cllt",
    "perturbed",
    "chain",
    "scan",
    "oracle",
    "suite",
];

fn default_paths() -> usize {
    10_000
}

fn default_n() -> usize {
    10
}

fn default_steps() -> usize {
    20_000
}

fn default_depth() -> usize {
    50
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub t: f64,
    /// Starting point; defaults to the normalized all-ones vector.
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    /// Letters used by stationary-law samplers.
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Steps per replica for Lyapunov estimation.
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_direction() -> Direction {
    Direction::Plus
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            paths: default_paths(),
            t: 0.0,
            x: None,
            n_list: None,
            t_list: None,
            direction: Direction::Plus,
            depth: default_depth(),
            steps: default_steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub estimator: Option<String>,
    #[serde(default)]
    pub workers: Option<usize>,
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub walk: WalkConfig,
    #[serde(default)]
    pub test_function: Option<TestFunction>,
    /// Estimator-specific parameters.
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub dim: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = if msg.contains("seed") { "seed" } else { "config" };
            config_error(field, msg)
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = o.paths {
            self.walk.paths = p;
        }
        if let Some(s) = o.steps {
            self.walk.steps = s;
        }
        if let Some(d) = o.dim {
            self.ensemble.dim = d;
        }
        if let Some(w) = o.workers {
            self.workers = Some(w);
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(e) = &self.estimator {
            if !ESTIMATORS.contains(&e.as_str()) {
                return Err(config_error("estimator", format!("unknown estimator '{e}'")));
            }
        }
        if self.ensemble.dim == 0 {
            return Err(config_error("ensemble.dim", "must be at least 1"));
        }
        crate::ensemble::Ensemble::new(self.ensemble.clone()).map_err(|e| config_error("ensemble", e.to_string()))?;
        if self.walk.paths < 2 {
            return Err(config_error("walk.paths", "need at least 2 paths"));
        }
        if self.walk.n == 0 {
            return Err(config_error("walk.n", "must be at least 1"));
        }
        if let Some(x) = &self.walk.x {
            if x.len() != self.ensemble.dim {
                return Err(config_error(
                    "walk.x",
                    format!("expected {} coordinates", self.ensemble.dim),
                ));
            }
        }
        if let Some(h) = &self.test_function {
            h.validate(self.ensemble.dim)
                .map_err(|e| config_error("test_function", e.to_string()))?;
        }
        if self.workers == Some(0) {
            return Err(config_error("workers", "must be at least 1"));
        }
        Ok(())
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Float(v)) => Ok(*v),
            Some(toml::Value::Integer(v)) => Ok(*v as f64),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected a number")),
        }
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(*v as usize),
            Some(_) => Err(config_error(
                &format!("params.{key}"),
                "expected a non-negative integer",
            )),
        }
    }

    pub fn param_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected a boolean")),
        }
    }

    pub fn param_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(f) => Ok(*f),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    _ => Err(config_error(&format!("params.{key}"), "expected numbers")),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected an array")),
        }
    }

    pub fn param_str(&self, key: &str) -> Result<Option<String>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected a string")),
        }
    }
}

impl EnsembleSpec {
    /// Reads an ensemble from a TOML document with the same layout as the
    /// `[ensemble]` table of an experiment config.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error("ensemble", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}
