//! Experiment configuration: TOML files and the flags that override them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    GenTree,
    ComputePsi,
    Simulate,
    Percolate,
    EstimateBr,
    EstimateRt,
    FlowCheck,
    PhaseScan,
    Gambler,
    Concentration,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::GenTree => "gen-tree",
            Operation::ComputePsi => "compute-psi",
            Operation::Simulate => "simulate",
            Operation::Percolate => "percolate",
            Operation::EstimateBr => "estimate-br",
            Operation::EstimateRt => "estimate-rt",
            Operation::FlowCheck => "flow-check",
            Operation::PhaseScan => "phase-scan",
            Operation::Gambler => "gambler",
            Operation::Concentration => "concentration",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A list given either as text (`"1,2,3"`, `"0.1:4:0.1"`) or as a TOML array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ListValue {
    Text(String),
    Numbers(Vec<f64>),
}

impl ListValue {
    pub fn floats(&self, key: &str) -> Result<Vec<f64>, CliError> {
        match self {
            ListValue::Text(s) => crate::spec::parse_f64_list(key, s),
            ListValue::Numbers(v) => Ok(v.clone()),
        }
    }

    pub fn integers(&self, key: &str) -> Result<Vec<u64>, CliError> {
        match self {
            ListValue::Text(s) => crate::spec::parse_u64_list(key, s),
            ListValue::Numbers(v) => v
                .iter()
                .map(|&x| {
                    (x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63)).then_some(x as u64).ok_or_else(|| {
                        CliError::Usage { key: key.to_string(), msg: format!("{x} is not a non-negative integer") }
                    })
                })
                .collect(),
        }
    }
}

impl std::str::FromStr for ListValue {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(ListValue::Text(s.to_string()))
    }
}

/// Every parameter any operation reads. Unset fields take per-operation defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depths: Option<ListValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<ListValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub returns: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rubin: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<ListValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl Params {
    /// Fields set in `top` replace those of `self`.
    pub fn overlay(mut self, top: Params) -> Params {
        overlay_fields!(self, top; tree, env, trials, depth, depths, gamma_grid, gamma, threshold, epsilon,
            edge_depth, steps, hit_depth, returns, rubin, escape_depth, horizon, mu, start, samples);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub operation: Operation,
    #[serde(default)]
    pub seed: u64,
}

/// Contents of a `run` configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSection,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage { key: "config".into(), msg: format!("{}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// A fully merged experiment: what every output records as its `config`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub operation: Operation,
    pub seed: u64,
    pub params: Params,
}
