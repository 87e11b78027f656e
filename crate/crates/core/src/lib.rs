//! Synthetic grammatical-error data built from chunked machine translation.
//!
//! Foreign-language sentences are split into short random chunks, each chunk
//! is translated on its own, and the chunk translations are recombined into
//! erroneous English sentences paired with the original English reference.
//! The resulting pairs are aligned into correction operations and filtered so
//! that their correction-type trigram distribution resembles authentic
//! learner data.

pub mod align;
pub mod chunker;
pub mod combiner;
pub mod config;
pub mod corpus;
pub mod error;
pub mod error_model;
pub mod fixtures;
pub mod pipeline;
pub mod rng;
pub mod tagger;
pub mod tagset;
pub mod translate;

pub use align::{align, classify_pair, AlignOp, Aligner, AlignmentSequence, CostModel, OpKind, PairClass};
pub use chunker::{chunk_sentence, ChunkedSentence};
pub use combiner::{combine, SyntheticCandidate};
pub use config::{PipelineConfig, ProviderKind};
pub use corpus::{
    dedup_by_target, read_parallel, read_tagged, write_pairs, SentencePair, TaggedSentence, TaggedToken,
};
pub use error::{Error, Result};
pub use error_model::{
    calibrate_threshold, estimate_distribution, extract_trigrams, f_beta, filter, score_pair,
    CorrectionTrigram, ErrorDistribution,
};
pub use pipeline::{run, ReferenceSource, RunDir, RunInputs, RunReport};
pub use tagger::{tag_or_passthrough, TagInput, Tagger};
pub use translate::{translate_chunks, NBestRecord, TranslationProvider};
