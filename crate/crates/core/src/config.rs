//! Physical-model configuration files.
//!
//! A config is a JSON object with the keys `mu`, `alpha` and `j2`. Missing
//! keys fall back to canonical units (`μ = α = 1`) and `J2 = 10⁻³`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elements::PhysicalModel;
use crate::error::{Error, Result};

/// Environment variable naming the model config file.
pub const CONFIG_ENV: &str = "INCRES_CONFIG";

pub const DEFAULT_J2: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub mu: f64,
    pub alpha: f64,
    pub j2: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            alpha: 1.0,
            j2: DEFAULT_J2,
        }
    }
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The file named by `INCRES_CONFIG`, or the default when it is unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) if !path.is_empty() => Self::from_file(path),
            _ => Ok(Self::default()),
        }
    }

    pub fn model(&self) -> Result<PhysicalModel<f64>> {
        PhysicalModel::new(self.mu, self.alpha, self.j2)
    }
}

impl From<PhysicalModel<f64>> for ModelConfig {
    fn from(m: PhysicalModel<f64>) -> Self {
        Self {
            mu: m.mu,
            alpha: m.alpha,
            j2: m.j2,
        }
    }
}
