use std::path::{Path, PathBuf};

use mailalias_core::{AliasAddressTemplate, RegistryConfig};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

/// Service settings, read from a TOML file. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    /// Name line printed on every alias address.
    pub carrier_name: String,
    pub street_suffix: String,
    pub unit_prefix: String,
    /// Days an alias stays valid after first use. Zero disables expiry.
    pub default_validity_days: u32,
    /// Extra JSONL files of official addresses, loaded after the bundled set.
    pub official_fixtures: Vec<PathBuf>,
    pub bind: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub seed: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let t = AliasAddressTemplate::default();
        ServiceConfig {
            carrier_name: t.carrier_name,
            street_suffix: t.street_suffix,
            unit_prefix: t.unit_prefix,
            default_validity_days: mailalias_core::registry::DEFAULT_VALIDITY_DAYS,
            official_fixtures: Vec::new(),
            bind: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("mailalias-data"),
            seed: 1,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ServiceError> {
        let cfg: ServiceConfig = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        cfg.registry_config()?;
        Ok(cfg)
    }

    /// Relative fixture paths are resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            for f in &mut cfg.official_fixtures {
                if f.is_relative() {
                    *f = dir.join(&*f);
                }
            }
        }
        Ok(cfg)
    }

    pub fn template(&self) -> AliasAddressTemplate {
        AliasAddressTemplate {
            carrier_name: self.carrier_name.clone(),
            street_suffix: self.street_suffix.clone(),
            unit_prefix: self.unit_prefix.clone(),
        }
    }

    pub fn registry_config(&self) -> Result<RegistryConfig, ServiceError> {
        let template = self.template();
        template
            .check()
            .map_err(|e| ServiceError::Config(format!("alias template: {e}")))?;
        Ok(RegistryConfig {
            template,
            default_validity_days: (self.default_validity_days > 0).then_some(self.default_validity_days),
            ..RegistryConfig::default()
        })
    }

    pub fn journal_path(&self) -> PathBuf {
        self.data_dir.join("events.jsonl")
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.data_dir.join("parcels.json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = ServiceConfig::from_toml_str("carrier_name = \"XYZ Alias\"\nport = 9000\n").unwrap();
        assert_eq!(cfg.carrier_name, "XYZ Alias");
        assert_eq!(cfg.port, 9000);
        assert_eq!(cfg.unit_prefix, "Unit");
        assert_eq!(cfg.registry_config().unwrap().default_validity_days, Some(30));
    }

    #[test]
    fn rejects_bad_templates_and_unknown_keys() {
        assert!(ServiceConfig::from_toml_str("unit_prefix = \"Unit9\"").is_err());
        assert!(ServiceConfig::from_toml_str("street_suffix = \"An Extremely Long Street Suffix\"").is_err());
        assert!(ServiceConfig::from_toml_str("colour = \"blue\"").is_err());
    }

    #[test]
    fn zero_validity_means_no_expiry() {
        let cfg = ServiceConfig::from_toml_str("default_validity_days = 0").unwrap();
        assert_eq!(cfg.registry_config().unwrap().default_validity_days, None);
    }
}
