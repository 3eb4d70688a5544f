use std::fs;
use std::path::{Path, PathBuf};

use isac_core::mcsim::McConfig;
use isac_core::{FormulaVariant, NetworkParams, QuadratureSpec, ResourceAllocation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// The whole run, as read from one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkParams,
    pub allocation: Option<ResourceAllocation>,
    pub quadrature: QuadratureSpec,
    pub mc: McConfig,
    pub formula_variant: FormulaVariant,
    pub output_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            network: NetworkParams::default(),
            allocation: None,
            quadrature: QuadratureSpec::default(),
            mc: McConfig::default(),
            formula_variant: FormulaVariant::default(),
            output_dir: PathBuf::from("out"),
            cache_dir: None,
        }
    }
}

/// The numeric part of a config; paths do not change results.
#[derive(Serialize)]
struct HashedInputs<'a> {
    network: &'a NetworkParams,
    allocation: &'a Option<ResourceAllocation>,
    quadrature: &'a QuadratureSpec,
    mc: &'a McConfig,
    formula_variant: FormulaVariant,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable")
    }

    /// SHA-256 of the canonical JSON of every numeric input.
    pub fn hash(&self) -> String {
        let inputs = HashedInputs {
            network: &self.network,
            allocation: &self.allocation,
            quadrature: &self.quadrature,
            mc: &self.mc,
            formula_variant: self.formula_variant,
        };
        let json = serde_json::to_vec(&inputs).expect("inputs serialize");
        hex::encode(Sha256::digest(json))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = self.network.violations();
        if !v.is_empty() {
            return Err(CliError::Core(isac_core::Error::Infeasible(v)));
        }
        self.quadrature.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.mc.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }
}
