//! Recombination of chunk translations into full erroneous sentences.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::translate::NBestRecord;

pub const DEFAULT_NUM_OUTPUTS: usize = 10;

/// Draw budget per requested output when enforcing distinct candidates.
pub const DRAWS_PER_OUTPUT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCandidate {
    pub pair_id: u64,
    pub tokens: Vec<String>,
    pub reference_tokens: Vec<String>,
    pub choice_vector: Vec<usize>,
    pub combination_logprob: f64,
}

/// Per-chunk sampling weights: softmax over the hypotheses' log scores,
/// stored as cumulative sums.
#[derive(Debug, Clone)]
pub struct ChoiceSampler {
    cumulative: Vec<Vec<f64>>,
}

impl ChoiceSampler {
    pub fn new(record: &NBestRecord) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(record.chunks.len());
        for (i, chunk) in record.chunks.iter().enumerate() {
            if chunk.hyps.is_empty() {
                return Err(Error::EmptyHypotheses { chunk: i });
            }
            let max = chunk
                .hyps
                .iter()
                .map(|h| h.score)
                .fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = chunk.hyps.iter().map(|h| (h.score - max).exp()).collect();
            let total: f64 = weights.iter().sum();
            let mut acc = 0.0;
            cumulative.push(
                weights
                    .iter()
                    .map(|w| {
                        acc += w / total;
                        acc
                    })
                    .collect(),
            );
        }
        Ok(ChoiceSampler { cumulative })
    }

    /// Draws one hypothesis index per chunk.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.cumulative
            .iter()
            .map(|cum| {
                let u: f64 = rng.random();
                cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
            })
            .collect()
    }

    /// Size of the combination space, saturating.
    pub fn space(&self) -> usize {
        self.cumulative
            .iter()
            .fold(1usize, |acc, c| acc.saturating_mul(c.len()))
    }
}

fn build(record: &NBestRecord, choice: Vec<usize>) -> SyntheticCandidate {
    let mut tokens = Vec::new();
    let mut logprob = 0.0;
    for (chunk, &i) in record.chunks.iter().zip(&choice) {
        let hyp = &chunk.hyps[i];
        tokens.extend(hyp.tokens.iter().cloned());
        logprob += hyp.score;
    }
    SyntheticCandidate {
        pair_id: record.pair_id,
        tokens,
        reference_tokens: record.reference.clone(),
        choice_vector: choice,
        combination_logprob: logprob,
    }
}

/// Samples up to `num_outputs` distinct candidate sentences for a record.
///
/// Each draw picks one hypothesis per chunk with probability proportional
/// to `exp(score)`. Draws whose token sequence was already produced are
/// rejected; sampling stops once `num_outputs` candidates exist, the
/// combination space is exhausted, or `20 * num_outputs` draws were spent.
pub fn combine<R: Rng + ?Sized>(
    record: &NBestRecord,
    rng: &mut R,
    num_outputs: usize,
) -> Result<Vec<SyntheticCandidate>> {
    let sampler = ChoiceSampler::new(record)?;
    let space = sampler.space();
    let budget = DRAWS_PER_OUTPUT * num_outputs;
    let mut seen_choices = HashSet::new();
    let mut seen_tokens = HashSet::new();
    let mut out = Vec::new();
    let mut draws = 0;
    while out.len() < num_outputs && draws < budget && seen_choices.len() < space {
        draws += 1;
        let choice = sampler.draw(rng);
        if !seen_choices.insert(choice.clone()) {
            continue;
        }
        let cand = build(record, choice);
        if seen_tokens.insert(cand.tokens.clone()) {
            out.push(cand);
        }
    }
    Ok(out)
}
