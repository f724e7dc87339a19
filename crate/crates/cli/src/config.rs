//! Experiment configuration files.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    MeanValue,
    PrimeSums,
    Halasz,
    Wirsing,
    Comparison,
    LocalLaw,
    Clt,
    OmegaPhi,
    Tk,
    Gallagher,
    Hypotheses,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::MeanValue => "mean-value",
            Self::PrimeSums => "prime-sums",
            Self::Halasz => "halasz",
            Self::Wirsing => "wirsing",
            Self::Comparison => "comparison",
            Self::LocalLaw => "local-law",
            Self::Clt => "clt",
            Self::OmegaPhi => "omega-phi",
            Self::Tk => "tk",
            Self::Gallagher => "gallagher",
            Self::Hypotheses => "hypotheses",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem, relative to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// One experiment. Which fields are required depends on `experiment`;
/// unused fields are rejected so that typos do not pass silently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(rename = "E", alias = "set", skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<mvlab::local_laws::HistogramMode>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<f64>>,
    #[serde(rename = "T", alias = "t", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frak_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frak_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_tail: Option<bool>,
    /// Complex evaluation points for the generating-function check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment_length: Option<u64>,
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputConfig,
}

fn is_default_output(o: &OutputConfig) -> bool {
    *o == OutputConfig::default()
}

/// A config problem, naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub detail: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field '{}': {}", self.field, self.detail)
    }
}

impl std::error::Error for ConfigError {}

pub fn field_error(field: &str, detail: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), detail: detail.into() }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn require<'a, T>(&self, field: &str, value: &'a Option<T>) -> Result<&'a T, ConfigError> {
        value.as_ref().ok_or_else(|| field_error(field, format!("required by experiment '{}'", self.experiment.name())))
    }

    /// `x` as an integer sieve limit, at least 2.
    pub fn x_int(&self) -> Result<u64, ConfigError> {
        to_limit("x", *self.require("x", &self.x)?)
    }

    /// `checkpoints` if given, else `[x]`.
    pub fn checkpoint_list(&self) -> Result<Vec<f64>, ConfigError> {
        let list = match (&self.checkpoints, self.x) {
            (Some(c), _) if !c.is_empty() => c.clone(),
            (Some(_), _) => return Err(field_error("checkpoints", "must not be empty")),
            (None, Some(x)) => vec![x],
            (None, None) => return Err(field_error("x", format!("x or checkpoints required by experiment '{}'", self.experiment.name()))),
        };
        let field = if self.checkpoints.is_some() { "checkpoints" } else { "x" };
        for &v in &list {
            to_limit(field, v)?;
        }
        Ok(list)
    }

    pub fn checkpoint_ints(&self) -> Result<Vec<u64>, ConfigError> {
        Ok(self.checkpoint_list()?.into_iter().map(|v| v.floor() as u64).collect())
    }
}

fn to_limit(field: &str, v: f64) -> Result<u64, ConfigError> {
    if !(v >= 2.0) || !v.is_finite() || v > 1e12 {
        return Err(field_error(field, format!("must be in [2, 1e12], got {v}")));
    }
    Ok(v.floor() as u64)
}
