//! Chunk translation through a pluggable n-best provider.
//!
//! Every chunk is sent as its own text, so the provider never sees the
//! surrounding sentence. Returned hypotheses are adapted to natural-log
//! scores, deduplicated by token sequence, sorted by descending score and
//! truncated to the n-best size.

mod provider;
mod records;
mod remote;
mod replay;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use provider::{
    provider_roundtrip, ProviderError, RawHypothesis, RetryPolicy, TranslationProvider, DEFAULT_MAX_BATCH,
};
pub use records::{read_records, write_record, Hypothesis, NBestChunk, NBestRecord, RecordReader};
pub use remote::{RemoteConfig, RemoteProvider};
pub use replay::{MockFallback, MockProvider, ReplayProvider};

use crate::chunker::ChunkedSentence;
use crate::corpus::tokenize;

pub const DEFAULT_N_BEST: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    #[default]
    LogProb,
    Probability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslateOptions {
    pub n_best: usize,
    pub score_kind: ScoreKind,
    pub normalize_by_length: bool,
    pub retry: RetryPolicy,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            n_best: DEFAULT_N_BEST,
            score_kind: ScoreKind::LogProb,
            normalize_by_length: false,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Transport or protocol failure after retries.
    Provider,
    /// Some chunk received no hypotheses.
    Empty,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum TranslateFailure {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("chunk {chunk} received no hypotheses")]
    NoHypotheses { chunk: usize },
}

impl TranslateFailure {
    pub fn kind(&self) -> FailureKind {
        match self {
            TranslateFailure::Provider(_) => FailureKind::Provider,
            TranslateFailure::NoHypotheses { .. } => FailureKind::Empty,
        }
    }
}

fn adapt(raw: RawHypothesis, opts: &TranslateOptions) -> Result<Hypothesis, ProviderError> {
    let tokens = tokenize(&raw.text);
    let mut score = match opts.score_kind {
        ScoreKind::LogProb => raw.score,
        ScoreKind::Probability => raw.score.ln(),
    };
    if opts.normalize_by_length && !tokens.is_empty() {
        score /= tokens.len() as f64;
    }
    if !score.is_finite() || score > 0.0 {
        return Err(ProviderError::Malformed {
            excerpt: format!("score {} for {:?} is not a log-probability", raw.score, raw.text),
        });
    }
    Ok(Hypothesis { tokens, score })
}

/// Adapts, deduplicates (keeping the best score per token sequence), sorts
/// by descending score and truncates to `opts.n_best`.
pub fn normalize_hypotheses(
    raw: Vec<RawHypothesis>,
    opts: &TranslateOptions,
) -> Result<Vec<Hypothesis>, ProviderError> {
    let mut out: Vec<Hypothesis> = Vec::with_capacity(raw.len());
    for r in raw {
        let h = adapt(r, opts)?;
        match out.iter_mut().find(|o| o.tokens == h.tokens) {
            Some(existing) => existing.score = existing.score.max(h.score),
            None => out.push(h),
        }
    }
    // Stable: equal scores keep provider order.
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out.truncate(opts.n_best.max(1));
    Ok(out)
}

fn fill(
    mut record: NBestRecord,
    raw: Vec<Vec<RawHypothesis>>,
    opts: &TranslateOptions,
) -> Result<NBestRecord, TranslateFailure> {
    for (i, (chunk, hyps)) in record.chunks.iter_mut().zip(raw).enumerate() {
        chunk.hyps = normalize_hypotheses(hyps, opts)?;
        if chunk.hyps.is_empty() {
            return Err(TranslateFailure::NoHypotheses { chunk: i });
        }
    }
    Ok(record)
}

/// Translates each chunk of one sentence in isolation.
pub fn translate_chunks<P: TranslationProvider + ?Sized>(
    chunked: ChunkedSentence,
    reference: Vec<String>,
    provider: &P,
    opts: &TranslateOptions,
) -> Result<NBestRecord, TranslateFailure> {
    let record = NBestRecord::skeleton(chunked, reference);
    let texts: Vec<String> = record.chunk_texts().collect();
    let raw = provider_roundtrip(provider, &texts, opts.n_best, &opts.retry)?;
    fill(record, raw, opts)
}

/// Translates many skeleton records, packing chunks from consecutive
/// sentences into shared provider batches. Batches run concurrently on the
/// current rayon pool; results come back in input order, one per skeleton.
pub fn translate_records<P: TranslationProvider + ?Sized>(
    skeletons: Vec<NBestRecord>,
    provider: &P,
    opts: &TranslateOptions,
) -> Vec<Result<NBestRecord, TranslateFailure>> {
    let texts: Vec<String> = skeletons.iter().flat_map(|r| r.chunk_texts()).collect();
    let batch_size = provider.max_batch().max(1);
    let batches: Vec<Result<Vec<Vec<RawHypothesis>>, ProviderError>> = texts
        .par_chunks(batch_size)
        .map(|batch| provider::roundtrip_batch(provider, batch, opts.n_best, &opts.retry))
        .collect();

    // Expand batch outcomes back to one slot per chunk.
    let mut per_chunk: Vec<Result<Vec<RawHypothesis>, ProviderError>> = Vec::with_capacity(texts.len());
    for (batch, outcome) in texts.chunks(batch_size).zip(batches) {
        match outcome {
            Ok(results) => per_chunk.extend(results.into_iter().map(Ok)),
            Err(e) => per_chunk.extend(std::iter::repeat_n(Err(e), batch.len())),
        }
    }

    let mut slots = per_chunk.into_iter();
    skeletons
        .into_iter()
        .map(|record| {
            // Drain this record's slots fully before looking for errors, so
            // a failure never shifts later records.
            let mine: Vec<_> = slots.by_ref().take(record.chunks.len()).collect();
            let raw: Result<Vec<_>, ProviderError> = mine.into_iter().collect();
            fill(record, raw?, opts)
        })
        .collect()
}
