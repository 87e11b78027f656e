use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on chunks per provider request.
pub const DEFAULT_MAX_BATCH: usize = 64;

/// One translation as returned by a provider, before score adaptation and
/// tokenization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawHypothesis {
    pub text: String,
    pub score: f64,
}

impl RawHypothesis {
    pub fn new(text: impl Into<String>, score: f64) -> Self {
        RawHypothesis {
            text: text.into(),
            score,
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum ProviderError {
    /// Connection, timeout and other failures worth retrying.
    #[error("transport error: {0}")]
    Transport(String),

    #[error("provider returned HTTP {status}")]
    Status { status: u16 },

    /// The provider answered but the payload is unusable; never retried.
    #[error("malformed provider response: {excerpt}")]
    Malformed { excerpt: String },
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        !matches!(self, ProviderError::Malformed { .. })
    }

    pub(crate) fn malformed(payload: &str) -> Self {
        let mut excerpt: String = payload.chars().take(200).collect();
        if excerpt.len() < payload.len() {
            excerpt.push_str("...");
        }
        ProviderError::Malformed { excerpt }
    }
}

/// A source of scored n-best translations for isolated text fragments.
///
/// Each text in a batch must be translated independently of the others;
/// responses are positionally aligned with the request.
pub trait TranslationProvider: Send + Sync {
    fn translate_batch(
        &self,
        texts: &[String],
        n_best: usize,
    ) -> Result<Vec<Vec<RawHypothesis>>, ProviderError>;

    fn max_batch(&self) -> usize {
        DEFAULT_MAX_BATCH
    }
}

impl<P: TranslationProvider + ?Sized> TranslationProvider for &P {
    fn translate_batch(
        &self,
        texts: &[String],
        n_best: usize,
    ) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
        (**self).translate_batch(texts, n_best)
    }

    fn max_batch(&self) -> usize {
        (**self).max_batch()
    }
}

impl<P: TranslationProvider + ?Sized> TranslationProvider for Box<P> {
    fn translate_batch(
        &self,
        texts: &[String],
        n_best: usize,
    ) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
        (**self).translate_batch(texts, n_best)
    }

    fn max_batch(&self) -> usize {
        (**self).max_batch()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(200),
        }
    }
}

/// Sends `texts` to the provider in batches of at most `max_batch`, retrying
/// retryable failures with exponential backoff. The result is aligned with
/// `texts`; an empty request makes no provider call.
pub fn provider_roundtrip<P: TranslationProvider + ?Sized>(
    provider: &P,
    texts: &[String],
    n_best: usize,
    retry: &RetryPolicy,
) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
    let mut out = Vec::with_capacity(texts.len());
    for batch in texts.chunks(provider.max_batch().max(1)) {
        out.extend(roundtrip_batch(provider, batch, n_best, retry)?);
    }
    Ok(out)
}

pub(crate) fn roundtrip_batch<P: TranslationProvider + ?Sized>(
    provider: &P,
    batch: &[String],
    n_best: usize,
    retry: &RetryPolicy,
) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
    if batch.is_empty() {
        return Ok(Vec::new());
    }
    let attempts = retry.attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        match provider.translate_batch(batch, n_best) {
            Ok(results) if results.len() == batch.len() => return Ok(results),
            Ok(results) => {
                return Err(ProviderError::Malformed {
                    excerpt: format!("{} results for {} texts", results.len(), batch.len()),
                })
            }
            Err(e) if e.is_retryable() && attempt < attempts => {
                thread::sleep(retry.base_delay * 2u32.pow(attempt - 1));
            }
            Err(e) => return Err(e),
        }
    }
}
