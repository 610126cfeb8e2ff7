//! Pipeline configuration file.
//!
//! ```json
//! {
//!   "thresholds": { "mi_plus": 0.9, "id_t": 6 },
//!   "provider": { "fixture": "counts.json" },
//!   "cache_path": "counts.cache.tsv",
//!   "missing_count_policy": "error",
//!   "max_merge_passes": 3
//! }
//! ```
//!
//! Omitted thresholds keep their defaults. `provider` is one of
//! `{"fixture": path}`, `{"corpus": path}` or `{"remote": {...}}`. Relative
//! paths resolve against the config file's directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{
    CachedProvider, CountCache, CountProvider, EvidenceError, FixtureProvider, LocalIndex, MissingPolicy, RemoteClient,
    RemoteConfig,
};
use crate::measures::{MeasureError, Thresholds};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid override `{0}`: expected name=value")]
    BadOverride(String),
    #[error(transparent)]
    Thresholds(#[from] MeasureError),
    #[error("max_merge_passes must be at least 1")]
    ZeroPasses,
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderSpec {
    Fixture(PathBuf),
    Corpus(PathBuf),
    Remote(RemoteConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub thresholds: Thresholds,
    pub provider: Option<ProviderSpec>,
    pub cache_path: Option<PathBuf>,
    pub missing_count_policy: MissingPolicy,
    pub max_merge_passes: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            provider: None,
            cache_path: None,
            missing_count_policy: MissingPolicy::Error,
            max_merge_passes: 3,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Self = serde_json::from_str(text)?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        match &mut cfg.provider {
            Some(ProviderSpec::Fixture(p)) | Some(ProviderSpec::Corpus(p)) => resolve(p),
            _ => {}
        }
        if let Some(p) = &mut cfg.cache_path {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Applies a `name=value` threshold override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadOverride(spec.to_string());
        let (name, value) = spec.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        if !self.thresholds.set(name.trim(), value) {
            return Err(bad());
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds.validate()?;
        if self.max_merge_passes == 0 {
            return Err(ConfigError::ZeroPasses);
        }
        Ok(())
    }

    /// Builds the configured provider, wrapped in the cache when a cache
    /// path is set. `None` when no provider is configured.
    pub fn build_provider(&self) -> Result<Option<Box<dyn CountProvider>>, ConfigError> {
        let Some(spec) = &self.provider else {
            return Ok(None);
        };
        let inner: Box<dyn CountProvider> = match spec {
            ProviderSpec::Fixture(p) => Box::new(FixtureProvider::load(p, self.missing_count_policy)?),
            ProviderSpec::Corpus(p) => Box::new(LocalIndex::load(p)?),
            ProviderSpec::Remote(r) => Box::new(RemoteClient::http(r.clone())?),
        };
        Ok(Some(match &self.cache_path {
            Some(path) => Box::new(CachedProvider::new(inner, Arc::new(CountCache::open(path)?))),
            None => inner,
        }))
    }
}
