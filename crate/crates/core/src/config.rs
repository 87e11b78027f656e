//! Pipeline configuration, stored as a flat `key = value` file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::chunker::DEFAULT_MEAN_LEN;
use crate::combiner::DEFAULT_NUM_OUTPUTS;
use crate::error::{Error, Result};
use crate::error_model::DEFAULT_SMOOTHING_K;
use crate::translate::{
    MockProvider, RemoteConfig, RemoteProvider, ReplayProvider, RetryPolicy, ScoreKind, TranslateOptions,
    TranslationProvider, DEFAULT_MAX_BATCH, DEFAULT_N_BEST,
};

pub const DEFAULT_KEEP_RATIO: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// Identity translation; for dry runs.
    #[default]
    Mock,
    Replay,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mean_len: f64,
    pub n_best: usize,
    pub num_outputs: usize,
    pub keep_ratio: f64,
    pub smoothing_k: f64,
    pub seed: u64,
    pub provider: ProviderKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provider_url: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provider_replay_path: Option<PathBuf>,
    /// `Name: value` header sent with every remote request.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provider_auth_header: Option<String>,
    pub provider_timeout_secs: f64,
    pub provider_max_batch: usize,
    pub provider_retries: u32,
    pub score_kind: ScoreKind,
    pub normalize_by_length: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mean_len: DEFAULT_MEAN_LEN,
            n_best: DEFAULT_N_BEST,
            num_outputs: DEFAULT_NUM_OUTPUTS,
            keep_ratio: DEFAULT_KEEP_RATIO,
            smoothing_k: DEFAULT_SMOOTHING_K,
            seed: 0,
            provider: ProviderKind::Mock,
            provider_url: None,
            provider_replay_path: None,
            provider_auth_header: None,
            provider_timeout_secs: 30.0,
            provider_max_batch: DEFAULT_MAX_BATCH,
            provider_retries: 3,
            score_kind: ScoreKind::LogProb,
            normalize_by_length: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.mean_len >= 1.0 && self.mean_len.is_finite()) {
            return bad(format!("mean_len must be >= 1, got {}", self.mean_len));
        }
        if self.n_best == 0 {
            return bad("n_best must be >= 1".into());
        }
        if self.num_outputs == 0 {
            return bad("num_outputs must be >= 1".into());
        }
        if !(self.keep_ratio > 0.0 && self.keep_ratio <= 1.0) {
            return bad(format!("keep_ratio must be in (0, 1], got {}", self.keep_ratio));
        }
        if !(self.smoothing_k > 0.0 && self.smoothing_k.is_finite()) {
            return bad(format!("smoothing_k must be > 0, got {}", self.smoothing_k));
        }
        if self.provider_max_batch == 0 {
            return bad("provider_max_batch must be >= 1".into());
        }
        if !(self.provider_timeout_secs > 0.0 && self.provider_timeout_secs.is_finite()) {
            return bad("provider_timeout_secs must be > 0".into());
        }
        if let Some(h) = &self.provider_auth_header {
            if !h.contains(':') {
                return bad("provider_auth_header must look like `Name: value`".into());
            }
        }
        match self.provider {
            ProviderKind::Replay if self.provider_replay_path.is_none() => {
                bad("provider = replay needs provider_replay_path".into())
            }
            ProviderKind::Remote if self.provider_url.is_none() => {
                bad("provider = remote needs provider_url".into())
            }
            _ => Ok(()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::from_toml(&text)
    }

    pub fn translate_options(&self) -> TranslateOptions {
        TranslateOptions {
            n_best: self.n_best,
            score_kind: self.score_kind,
            normalize_by_length: self.normalize_by_length,
            retry: RetryPolicy {
                attempts: self.provider_retries.max(1),
                ..RetryPolicy::default()
            },
        }
    }

    pub fn build_provider(&self) -> Result<Box<dyn TranslationProvider>> {
        self.validate()?;
        Ok(match self.provider {
            ProviderKind::Mock => Box::new(MockProvider::identity()),
            ProviderKind::Replay => {
                let path = self.provider_replay_path.as_deref().expect("validated");
                Box::new(ReplayProvider::from_file(path)?)
            }
            ProviderKind::Remote => {
                let mut remote = RemoteConfig::new(self.provider_url.clone().expect("validated"));
                remote.timeout = Duration::from_secs_f64(self.provider_timeout_secs);
                remote.max_batch = self.provider_max_batch;
                remote.auth_header = self.provider_auth_header.as_ref().map(|h| {
                    let (name, value) = h.split_once(':').expect("validated");
                    (name.trim().to_owned(), value.trim().to_owned())
                });
                Box::new(RemoteProvider::new(remote))
            }
        })
    }
}
