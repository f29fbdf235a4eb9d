use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("experiment `{experiment}` does not take parameter `{name}`")]
    UnknownParameter { experiment: String, name: String },
    #[error("parameter `{name}`: {reason}")]
    BadParameter { name: String, reason: String },
    #[error("trial count must be positive")]
    NoTrials,
    #[error("invalid config file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] crate::error::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl ConfigError {
    pub fn bad(name: &str, reason: impl Into<String>) -> Self {
        ConfigError::BadParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Numbers(Vec<f64>),
    Text(String),
    Texts(Vec<String>),
}

impl ParamValue {
    /// Parses a command-line value: a number, a comma-separated list of
    /// numbers, or otherwise text (comma-separated text becomes a list).
    pub fn parse_cli(raw: &str) -> ParamValue {
        let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
        let numbers: Option<Vec<f64>> = parts.iter().map(|p| p.parse().ok()).collect();
        match (numbers, parts.len()) {
            (Some(mut v), 1) => ParamValue::Number(v.remove(0)),
            (Some(v), _) => ParamValue::Numbers(v),
            (None, 1) => ParamValue::Text(raw.trim().to_string()),
            (None, _) => ParamValue::Texts(parts.into_iter().map(String::from).collect()),
        }
    }

    fn map_numbers(&mut self, f: impl Fn(f64) -> f64) {
        match self {
            ParamValue::Number(x) => *x = f(*x),
            ParamValue::Numbers(v) => v.iter_mut().for_each(|x| *x = f(*x)),
            _ => {}
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ConfigError::bad("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

/// One experiment run. Angles are radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, ParamValue>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// Parameters measured in radians; `--degrees` converts these.
pub const ANGLE_PARAMS: &[&str] = &[
    "theta", "alpha", "delta", "theta_f", "theta_g", "theta_e", "x", "a", "a2", "b", "b2", "offset",
];

impl ExperimentConfig {
    pub fn new(experiment: &str, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            parameters: BTreeMap::new(),
            trials,
            seed,
            output: None,
        }
    }

    pub fn with(mut self, name: &str, value: ParamValue) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn convert_degrees(&mut self) {
        for (name, value) in self.parameters.iter_mut() {
            if ANGLE_PARAMS.contains(&name.as_str()) {
                value.map_numbers(f64::to_radians);
            }
        }
    }

    pub(crate) fn params(&self) -> Params<'_> {
        Params { config: self }
    }
}

/// Typed access to parameters with defaults.
pub(crate) struct Params<'a> {
    config: &'a ExperimentConfig,
}

impl Params<'_> {
    fn get(&self, name: &str) -> Option<&ParamValue> {
        self.config.parameters.get(name)
    }

    pub fn number(&self, name: &str, default: f64) -> Result<f64, ConfigError> {
        let v = match self.get(name) {
            None => default,
            Some(ParamValue::Number(x)) => *x,
            Some(_) => return Err(ConfigError::bad(name, "expected a single number")),
        };
        finite(name, v)
    }

    pub fn optional_number(&self, name: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(name) {
            None => Ok(None),
            Some(_) => self.number(name, 0.0).map(Some),
        }
    }

    pub fn numbers(&self, name: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let v = match self.get(name) {
            None => default.to_vec(),
            Some(ParamValue::Number(x)) => vec![*x],
            Some(ParamValue::Numbers(v)) => v.clone(),
            Some(_) => return Err(ConfigError::bad(name, "expected numbers")),
        };
        if v.is_empty() {
            return Err(ConfigError::bad(name, "empty list"));
        }
        v.into_iter().map(|x| finite(name, x)).collect()
    }

    pub fn text(&self, name: &str, default: &str) -> Result<String, ConfigError> {
        match self.get(name) {
            None => Ok(default.to_string()),
            Some(ParamValue::Text(s)) => Ok(s.clone()),
            Some(_) => Err(ConfigError::bad(name, "expected text")),
        }
    }

    pub fn texts(&self, name: &str, default: &[&str]) -> Result<Vec<String>, ConfigError> {
        match self.get(name) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(ParamValue::Text(s)) => Ok(vec![s.clone()]),
            Some(ParamValue::Texts(v)) if !v.is_empty() => Ok(v.clone()),
            Some(_) => Err(ConfigError::bad(name, "expected text")),
        }
    }
}

fn finite(name: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::bad(name, "must be finite"))
    }
}
