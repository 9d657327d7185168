//! Scenario configuration: a single TOML file describing the protocol,
//! the analysis to run on it, and protocol-specific parameters.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Errors split by exit code: bad configs (2) vs numeric preconditions (3).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<qgt::Error> for CliError {
    fn from(e: qgt::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Meyer,
    Ewl,
    Mw,
    Minority,
    Cournot,
    Stackelberg,
    Bv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Evaluate,
    NashVerify,
    NashSearch,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Range of values for the single swept parameter: either an explicit
/// list or an inclusive linspace.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub parameter: Option<String>,
    /// Rejected when it names more than one parameter.
    #[serde(default)]
    pub parameters: Option<Vec<String>>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
}

impl SweepSection {
    pub fn parameter_name(&self) -> Result<String, CliError> {
        if let Some(list) = &self.parameters {
            if list.len() > 1 {
                return Err(CliError::Config(
                    "sweeping multiple parameters is unsupported; give exactly one".into(),
                ));
            }
            if let Some(name) = list.first() {
                return Ok(name.clone());
            }
        }
        self.parameter
            .clone()
            .ok_or_else(|| CliError::Config("sweep: missing field `parameter`".into()))
    }

    pub fn grid_values(&self) -> Result<Vec<f64>, CliError> {
        if let Some(values) = &self.values {
            return Ok(values.clone());
        }
        match (self.start, self.stop, self.count) {
            (Some(start), Some(stop), Some(count)) => Ok(match count {
                0 => vec![],
                1 => vec![start],
                _ => (0..count)
                    .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                    .collect(),
            }),
            _ => Err(CliError::Config(
                "sweep: give either `values` or all of `start`, `stop`, `count`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub analysis: Analysis,
    #[serde(default)]
    pub parameters: toml::value::Table,
    #[serde(default)]
    pub grid: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

impl ScenarioConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Deserialize the `[parameters]` table into a protocol's typed
    /// parameter struct, keeping serde's field-level messages.
    pub fn typed_parameters<T: serde::de::DeserializeOwned>(&self) -> Result<T, CliError> {
        toml::Value::Table(self.parameters.clone())
            .try_into()
            .map_err(|e| CliError::Config(format!("invalid parameters: {e}")))
    }

    pub fn resolution(&self) -> Vec<usize> {
        match &self.grid {
            Some(g) if !g.is_empty() => g.clone(),
            _ => vec![24],
        }
    }
}
