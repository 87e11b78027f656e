//! Seeded synthetic corpora and a noisy provider, for tests, benchmarks and
//! dry runs. Nothing here is linguistically serious; the generators only
//! need to exercise every stage with realistic shapes.

use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::PipelineConfig;
use crate::corpus::{self, write_pairs, write_tagged_sentence, SentencePair, TaggedSentence};
use crate::error::{Error, Result};
use crate::pipeline::{chunk_stage, translate_stage, RunInputs};
use crate::tagger::Tagger;
use crate::translate::{ProviderError, RawHypothesis, TranslationProvider};
use crate::ReferenceSource;

const DETS: &[&str] = &["the", "a", "this", "my"];
const ADJS: &[&str] = &["big", "small", "old", "young", "red", "happy", "quiet"];
const NOUNS: &[&str] = &[
    "dog", "cat", "man", "woman", "child", "teacher", "house", "car", "book", "tree", "city", "river",
    "letter", "song",
];
const VERBS: &[&str] = &[
    "saw", "found", "liked", "wanted", "visited", "opened", "painted", "watched", "wrote", "bought",
];
const PREPS: &[&str] = &["in", "on", "near", "under", "behind", "with", "from"];
const PRONOUNS: &[&str] = &["he", "she", "they", "we", "it"];

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words.choose(rng).expect("non-empty word list")
}

fn noun_phrase<R: Rng>(rng: &mut R, out: &mut Vec<String>) {
    out.push(pick(rng, DETS).to_owned());
    if rng.random_bool(0.5) {
        out.push(pick(rng, ADJS).to_owned());
    }
    let noun = pick(rng, NOUNS);
    if rng.random_bool(0.25) {
        out.push(format!("{noun}s"));
    } else {
        out.push(noun.to_owned());
    }
}

/// One well-formed sentence of roughly 4 to 20 tokens.
pub fn sentence<R: Rng>(rng: &mut R) -> Vec<String> {
    let mut out = Vec::new();
    if rng.random_bool(0.3) {
        let p = pick(rng, PRONOUNS);
        let mut c = p.chars();
        let first = c.next().expect("non-empty").to_uppercase();
        out.push(first.chain(c).collect());
    } else {
        noun_phrase(rng, &mut out);
        let mut c = out[0].chars();
        let first: String = c.next().expect("non-empty").to_uppercase().chain(c).collect();
        out[0] = first;
    }
    out.push(pick(rng, VERBS).to_owned());
    noun_phrase(rng, &mut out);
    for _ in 0..rng.random_range(0..3) {
        out.push(pick(rng, PREPS).to_owned());
        noun_phrase(rng, &mut out);
    }
    out.push(".".to_owned());
    out
}

/// `n` pairs whose source and target sides are the same clean sentence, as
/// if the pivot language shared the target's vocabulary.
pub fn parallel_corpus(seed: u64, n: usize) -> Vec<SentencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n as u64)
        .map(|id| {
            let s = sentence(&mut rng);
            SentencePair {
                id,
                source_tokens: s.clone(),
                target_tokens: s,
            }
        })
        .collect()
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn typo(word: &str) -> String {
    let mut c: Vec<char> = word.chars().collect();
    let i = c.len() / 2;
    c.swap(i - 1, i);
    c.into_iter().collect()
}

/// Deterministic provider that answers each chunk with its identity plus a
/// few corrupted variants (dropped article, number flip, typo, extra
/// article). The answer depends only on the chunk text and the seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoisyProvider {
    pub seed: u64,
}

impl NoisyProvider {
    pub fn hypotheses(&self, text: &str, n_best: usize) -> Vec<RawHypothesis> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(text) ^ self.seed);
        let words: Vec<&str> = text.split(' ').collect();
        let mut variants: Vec<Vec<String>> = Vec::new();
        if let Some(i) = words
            .iter()
            .position(|w| DETS.contains(&w.to_lowercase().as_str()))
        {
            if words.len() > 1 {
                let mut v: Vec<String> = words.iter().map(|w| w.to_string()).collect();
                v.remove(i);
                variants.push(v);
            }
        }
        if let Some(i) = words.iter().rposition(|w| w.len() > 3) {
            let mut v: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            v[i] = match v[i].strip_suffix('s') {
                Some(stem) => stem.to_owned(),
                None => format!("{}s", v[i]),
            };
            variants.push(v);
            let mut v: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            v[i] = typo(&v[i]);
            variants.push(v);
        }
        let mut v = vec!["the".to_owned()];
        v.extend(words.iter().map(|w| w.to_string()));
        variants.push(v);

        let mut out = vec![RawHypothesis::new(text, -rng.random_range(0.05..0.4))];
        for v in variants {
            out.push(RawHypothesis::new(v.join(" "), -rng.random_range(0.8..3.0)));
        }
        out.truncate(n_best);
        out
    }
}

impl TranslationProvider for NoisyProvider {
    fn translate_batch(
        &self,
        texts: &[String],
        n_best: usize,
    ) -> Result<Vec<Vec<RawHypothesis>>, ProviderError> {
        Ok(texts.iter().map(|t| self.hypotheses(t, n_best)).collect())
    }
}

/// Tagged learner sentences and their corrections. Learner errors are
/// mostly missing articles, with some number slips and typos.
pub fn learner_reference(seed: u64, n: usize, tagger: &Tagger) -> (Vec<TaggedSentence>, Vec<TaggedSentence>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut learner = Vec::with_capacity(n);
    let mut corrected = Vec::with_capacity(n);
    for _ in 0..n {
        let good = sentence(&mut rng);
        let mut bad = Vec::with_capacity(good.len());
        for (i, w) in good.iter().enumerate() {
            let lw = w.to_lowercase();
            if i > 0 && DETS.contains(&lw.as_str()) && rng.random_bool(0.3) {
                continue;
            }
            if NOUNS.iter().any(|n| format!("{n}s") == lw) && rng.random_bool(0.3) {
                bad.push(w[..w.len() - 1].to_owned());
                continue;
            }
            if lw.len() > 5 && rng.random_bool(0.03) {
                bad.push(typo(w));
                continue;
            }
            bad.push(w.clone());
        }
        learner.push(tagger.tag(&bad));
        corrected.push(tagger.tag(&good));
    }
    (learner, corrected)
}

/// Files written by [`write_run_fixture`].
#[derive(Debug, Clone)]
pub struct RunFixture {
    pub inputs: RunInputs,
    /// N-best recording covering every chunk the configured chunker produces.
    pub replay: PathBuf,
}

fn write_tagged(path: &Path, sentences: &[TaggedSentence]) -> Result<()> {
    use std::io::Write;
    let mut w = corpus::create(path)?;
    for s in sentences {
        write_tagged_sentence(&mut w, s).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a parallel corpus of `pairs` pairs, a tagged learner reference,
/// and a replay recording made with [`NoisyProvider`] under `cfg`'s chunking
/// parameters.
pub fn write_run_fixture(dir: &Path, pairs: usize, seed: u64, cfg: &PipelineConfig) -> Result<RunFixture> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let source = dir.join("corpus.src");
    let target = dir.join("corpus.tgt");
    write_pairs(&parallel_corpus(seed, pairs), &source, &target)?;

    let (learner, corrected) = learner_reference(seed ^ 0x5eed, pairs.max(200) / 2, &Tagger::default());
    let reference_source = dir.join("learner.tagged");
    let reference_target = dir.join("corrected.tagged");
    write_tagged(&reference_source, &learner)?;
    write_tagged(&reference_target, &corrected)?;

    let skeletons = dir.join("recording.chunks.jsonl");
    let replay = dir.join("replay.jsonl");
    chunk_stage(&source, &target, &skeletons, cfg)?;
    translate_stage(
        &skeletons,
        &replay,
        &dir.join("recording.failures.jsonl"),
        &NoisyProvider { seed },
        &cfg.translate_options(),
    )?;
    Ok(RunFixture {
        inputs: RunInputs {
            source,
            target,
            reference: ReferenceSource::Tagged {
                source: reference_source,
                target: reference_target,
            },
        },
        replay,
    })
}
