use std::collections::HashMap;
use std::path::Path;

use super::provider::{ProviderError, RawHypothesis, TranslationProvider};
use super::records::read_records;
use crate::error::Result;

/// Serves hypotheses recorded in an n-best JSONL file, keyed by chunk text.
///
/// Chunks absent from the recording get an empty hypothesis list. Recorded
/// scores are already log-probabilities, so replayed runs should use the
/// default score adapter.
#[derive(Debug, Clone, Default)]
pub struct ReplayProvider {
    table: HashMap<String, Vec<RawHypothesis>>,
}

impl ReplayProvider {
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut table = HashMap::new();
        for record in read_records(path)? {
            for chunk in record?.chunks {
                table.entry(chunk.tokens.join(" ")).or_insert_with(|| {
                    chunk
                        .hyps
                        .iter()
                        .map(|h| RawHypothesis::new(h.tokens.join(" "), h.score))
                        .collect()
                });
            }
        }
        Ok(ReplayProvider { table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl TranslationProvider for ReplayProvider {
    fn translate_batch(
        &self,
        texts: &[String],
        n_best: usize,
    ) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
        Ok(texts
            .iter()
            .map(|t| {
                let mut hyps = self.table.get(t).cloned().unwrap_or_default();
                hyps.truncate(n_best);
                hyps
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MockFallback {
    /// Unknown text translates to itself with score 0.
    #[default]
    Identity,
    /// Unknown text gets no hypotheses.
    Empty,
}

/// Deterministic in-memory provider for tests and dry runs.
#[derive(Debug, Clone, Default)]
pub struct MockProvider {
    table: HashMap<String, Vec<RawHypothesis>>,
    fallback: MockFallback,
}

impl MockProvider {
    pub fn identity() -> Self {
        MockProvider::default()
    }

    pub fn with_fallback(fallback: MockFallback) -> Self {
        MockProvider {
            table: HashMap::new(),
            fallback,
        }
    }

    pub fn insert(&mut self, text: impl Into<String>, hyps: Vec<RawHypothesis>) -> &mut Self {
        self.table.insert(text.into(), hyps);
        self
    }
}

impl TranslationProvider for MockProvider {
    fn translate_batch(
        &self,
        texts: &[String],
        _n_best: usize,
    ) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
        Ok(texts
            .iter()
            .map(|t| match self.table.get(t) {
                Some(h) => h.clone(),
                None => match self.fallback {
                    MockFallback::Identity => vec![RawHypothesis::new(t.clone(), 0.0)],
                    MockFallback::Empty => Vec::new(),
                },
            })
            .collect())
    }
}
