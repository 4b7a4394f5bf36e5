//! Optional TOML configuration; command-line flags take precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::{Format, Preset};
use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub phase: PhaseSection,
    #[serde(default)]
    pub qcrb: QcrbSection,
    #[serde(default)]
    pub laurent: LaurentSection,
    #[serde(default)]
    pub pole_fit: PoleFitSection,
    #[serde(default)]
    pub validate: ValidateSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub delta: Option<f64>,
    pub big_gamma: Option<f64>,
    pub gamma0: Option<f64>,
    pub gamma_c: Option<f64>,
    pub gamma_bath: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub mu_in: Option<[f64; 4]>,
    pub covariance_mode: Option<String>,
    pub derivative_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub delta_range: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSection {
    pub ep_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcrbSection {
    pub epsilon: Option<f64>,
    pub omega_range: Option<String>,
    pub log: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaurentSection {
    pub epsilon: Option<f64>,
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleFitSection {
    pub input: Option<PathBuf>,
    pub omega0: Option<f64>,
    pub window: Option<String>,
    pub derivative_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub preset: Option<Preset>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}
