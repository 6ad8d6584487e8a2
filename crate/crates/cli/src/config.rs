//! Run configuration: flags, an optional JSON file and environment defaults.
//! Precedence is flag, then file, then environment, then built-in default.

use std::path::{Path, PathBuf};

use painleve_core::catalog::{HamiltonianSystem, ParameterValues};
use painleve_core::numerics::{FloatFormat, Guards, Method};
use painleve_core::symkernel::parse_rational;
use serde::Deserialize;

use crate::error::CliError;

pub const ENV_ATOL: &str = "PAINLEVE_ATOL";
pub const ENV_RTOL: &str = "PAINLEVE_RTOL";
pub const ENV_STEP: &str = "PAINLEVE_STEP";
pub const ENV_GUARD: &str = "PAINLEVE_GUARD";

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk4,
    Rk45,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub system: Option<String>,
    pub time: Option<String>,
    pub initial: Option<Vec<f64>>,
    /// Rationals as strings, e.g. `"1/2"`.
    pub params: Option<Vec<String>>,
    pub span: Option<[f64; 2]>,
    pub method: Option<MethodName>,
    pub step: Option<f64>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub guard: Option<f64>,
    pub residual_skip: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub float_format: Option<FloatFormat>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

fn env_f64(name: &str) -> Result<Option<f64>, CliError> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse::<f64>().map(Some).map_err(|_| CliError::Usage(format!("{name}={v} is not a number"))),
        Err(_) => Ok(None),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be a positive number, got {v}")))
    }
}

/// Integrator choice after merging all sources.
pub fn resolve_method(
    method: Option<MethodName>,
    step: Option<f64>,
    atol: Option<f64>,
    rtol: Option<f64>,
    file: &FileConfig,
) -> Result<Method, CliError> {
    let method = method.or(file.method).unwrap_or(MethodName::Rk45);
    Ok(match method {
        MethodName::Rk4 => {
            let step = step.or(file.step).or(env_f64(ENV_STEP)?).unwrap_or(DEFAULT_STEP);
            Method::Rk4 { step: positive("step", step)? }
        }
        MethodName::Rk45 => {
            let atol = atol.or(file.atol).or(env_f64(ENV_ATOL)?).unwrap_or(DEFAULT_TOL);
            let rtol = rtol.or(file.rtol).or(env_f64(ENV_RTOL)?).unwrap_or(DEFAULT_TOL);
            Method::Rk45 { atol: positive("atol", atol)?, rtol: positive("rtol", rtol)? }
        }
    })
}

pub fn resolve_guards(guard: Option<f64>, skip: Option<f64>, file: &FileConfig) -> Result<Guards, CliError> {
    let d = Guards::default();
    let denominator = guard.or(file.guard).or(env_f64(ENV_GUARD)?).unwrap_or(d.denominator);
    let residual_skip = skip.or(file.residual_skip).unwrap_or(d.residual_skip);
    Ok(Guards {
        denominator: positive("guard", denominator)?,
        residual_skip: positive("residual skip", residual_skip)?,
    })
}

/// Splits `"1/2, -1/2"` into rationals.
pub fn parse_rational_list(src: &str) -> Result<Vec<painleve_core::symkernel::Rational>, CliError> {
    src.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_rational(s).map_err(CliError::from)).collect()
}

pub fn parse_f64_list(src: &str) -> Result<Vec<f64>, CliError> {
    src.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: `{}`", s.trim()))))
        .collect()
}

/// Accepts either every parameter or only the free ones; the relation is
/// checked before anything runs.
pub fn parameter_values(
    sys: &HamiltonianSystem,
    values: &[painleve_core::symkernel::Rational],
) -> Result<ParameterValues, CliError> {
    let all = sys.params().len();
    if values.len() == all {
        Ok(ParameterValues::new(sys, values)?)
    } else if values.len() + 1 == all {
        Ok(ParameterValues::from_free(sys, values)?)
    } else {
        Err(CliError::Usage(format!("{} takes {} parameters ({} free), got {}", sys.id, all, all - 1, values.len())))
    }
}
