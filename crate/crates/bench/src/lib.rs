//! Fixture builders shared by the benchmarks.

use errforge::translate::{Hypothesis, NBestChunk, NBestRecord};
use errforge::{TaggedSentence, TaggedToken};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[(&str, &str)] = &[
    ("the", "DT"),
    ("a", "DT"),
    ("dog", "NN"),
    ("dogs", "NNS"),
    ("run", "VBP"),
    ("ran", "VBD"),
    ("quick", "JJ"),
    ("quickest", "JJS"),
    ("in", "IN"),
    ("of", "IN"),
    ("house", "NN"),
    ("houses", "NNS"),
    (".", "."),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tagged_sentence<R: Rng>(rng: &mut R, len: usize) -> TaggedSentence {
    TaggedSentence::new(
        (0..len)
            .map(|_| {
                let (w, t) = WORDS.choose(rng).unwrap();
                TaggedToken::new(*w, *t)
            })
            .collect(),
    )
}

pub fn tokens<R: Rng>(rng: &mut R, len: usize) -> Vec<String> {
    (0..len)
        .map(|_| WORDS.choose(rng).unwrap().0.to_owned())
        .collect()
}

/// A record with `chunks` chunks of `hyps` hypotheses each.
pub fn nbest_record<R: Rng>(rng: &mut R, chunks: usize, hyps: usize) -> NBestRecord {
    let chunks: Vec<NBestChunk> = (0..chunks)
        .map(|c| NBestChunk {
            tokens: vec![format!("c{c}")],
            hyps: (0..hyps)
                .map(|h| Hypothesis {
                    tokens: vec![format!("w{c}_{h}"), "x".to_owned()],
                    score: -rng.random_range(0.0..3.0),
                })
                .collect(),
        })
        .collect();
    NBestRecord {
        pair_id: 0,
        source: chunks.iter().flat_map(|c| c.tokens.clone()).collect(),
        reference: vec!["ref".to_owned()],
        chunks,
    }
}
