//! Random contiguous chunking of source sentences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MEAN_LEN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkedSentence {
    pub pair_id: u64,
    pub chunks: Vec<Vec<String>>,
}

impl ChunkedSentence {
    pub fn tokens(&self) -> impl Iterator<Item = &String> {
        self.chunks.iter().flatten()
    }
}

/// Splits `tokens` into chunks. After every token but the last, a boundary
/// is placed independently with probability `1 / mean_len`, so chunk lengths
/// are geometric with mean `mean_len` (truncated at the sentence end).
pub fn chunk_sentence<R: Rng + ?Sized>(
    pair_id: u64,
    tokens: &[String],
    rng: &mut R,
    mean_len: f64,
) -> Result<ChunkedSentence> {
    if tokens.is_empty() {
        return Err(Error::EmptySentence);
    }
    if !(mean_len.is_finite() && mean_len >= 1.0) {
        return Err(Error::Config(format!("mean_len must be >= 1, got {mean_len}")));
    }
    let p = 1.0 / mean_len;
    let mut chunks = Vec::new();
    let mut current = Vec::new();
    let last = tokens.len() - 1;
    for (i, tok) in tokens.iter().enumerate() {
        current.push(tok.clone());
        if i == last || rng.random_bool(p) {
            chunks.push(std::mem::take(&mut current));
        }
    }
    Ok(ChunkedSentence { pair_id, chunks })
}
