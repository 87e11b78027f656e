//! HTTP provider speaking the `/translate` JSON protocol.
//!
//! Request: `{"texts": [..], "n_best": N}`.
//! Response: `{"results": [[{"text": .., "score": ..}, ..], ..]}`, one inner
//! list per request text, in request order.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use super::provider::{ProviderError, RawHypothesis, TranslationProvider, DEFAULT_MAX_BATCH};

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub timeout: Duration,
    /// Full header line value pair, e.g. `("Authorization", "Bearer ...")`.
    pub auth_header: Option<(String, String)>,
    pub max_batch: usize,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        RemoteConfig {
            base_url: base_url.into(),
            timeout: Duration::from_secs(30),
            auth_header: None,
            max_batch: DEFAULT_MAX_BATCH,
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    texts: &'a [String],
    n_best: usize,
}

#[derive(Deserialize)]
struct Response {
    results: Vec<Vec<RawHypothesis>>,
}

pub struct RemoteProvider {
    agent: Agent,
    endpoint: String,
    config: RemoteConfig,
}

impl RemoteProvider {
    pub fn new(config: RemoteConfig) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let endpoint = format!("{}/translate", config.base_url.trim_end_matches('/'));
        RemoteProvider {
            agent,
            endpoint,
            config,
        }
    }
}

impl TranslationProvider for RemoteProvider {
    fn translate_batch(
        &self,
        texts: &[String],
        n_best: usize,
    ) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let mut req = self.agent.post(&self.endpoint);
        if let Some((name, value)) = &self.config.auth_header {
            req = req.header(name.as_str(), value.as_str());
        }
        let mut resp = req
            .send_json(Request { texts, n_best })
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(ProviderError::Status { status });
        }
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let parsed: Response = serde_json::from_str(&body).map_err(|_| ProviderError::malformed(&body))?;
        if parsed.results.len() != texts.len() {
            return Err(ProviderError::malformed(&body));
        }
        Ok(parsed.results)
    }

    fn max_batch(&self) -> usize {
        self.config.max_batch
    }
}
