//! End-to-end orchestration and the file-based stages behind it.
//!
//! Every stage reads and writes the documented on-disk formats, so a run can
//! be resumed or inspected at any point. Work is processed in fixed-size
//! blocks on the current rayon pool; each block's results are written in
//! input order, and all randomness comes from per-pair streams, so the
//! number of worker threads never changes an output byte.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{AlignOp, Aligner, AlignmentSequence};
use crate::chunker::chunk_sentence;
use crate::combiner::{combine, SyntheticCandidate};
use crate::config::PipelineConfig;
use crate::corpus::{self, read_parallel, read_tagged, write_tokens, LineReader, TaggedSentence};
use crate::error::{Error, Result};
use crate::error_model::{estimate_distribution, filter, ErrorDistribution, FilterItem, FilterReport};
use crate::rng::{self, Stage};
use crate::tagger::Tagger;
use crate::translate::{
    read_records, translate_records, write_record, FailureKind, NBestRecord, TranslateOptions,
    TranslationProvider,
};

const BLOCK: usize = 512;

/// File layout of a run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("run.toml")
    }
    pub fn skeletons(&self) -> PathBuf {
        self.root.join("chunks.jsonl")
    }
    pub fn nbest(&self) -> PathBuf {
        self.root.join("nbest.jsonl")
    }
    pub fn failures(&self) -> PathBuf {
        self.root.join("translate_failures.jsonl")
    }
    pub fn candidates_src(&self) -> PathBuf {
        self.root.join("candidates.src")
    }
    pub fn candidates_tgt(&self) -> PathBuf {
        self.root.join("candidates.tgt")
    }
    pub fn candidates_meta(&self) -> PathBuf {
        self.root.join("candidates.jsonl")
    }
    pub fn alignments(&self) -> PathBuf {
        self.root.join("candidates.align")
    }
    pub fn distribution(&self) -> PathBuf {
        self.root.join("reference.dist.tsv")
    }
    pub fn filtered_src(&self) -> PathBuf {
        self.root.join("filtered.src")
    }
    pub fn filtered_tgt(&self) -> PathBuf {
        self.root.join("filtered.tgt")
    }
    pub fn report(&self) -> PathBuf {
        self.root.join("report.json")
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn stage_err(stage: &'static str, pair_id: u64) -> impl Fn(Error) -> Error {
    move |e| Error::Stage {
        stage,
        pair_id,
        source: Box::new(e),
    }
}

/// Reads items in blocks and hands each block to `f`.
fn for_blocks<T, I, F>(items: I, mut f: F) -> Result<()>
where
    I: Iterator<Item = Result<T>>,
    F: FnMut(Vec<T>) -> Result<()>,
{
    let mut block = Vec::with_capacity(BLOCK);
    for item in items {
        block.push(item?);
        if block.len() == BLOCK {
            f(std::mem::take(&mut block))?;
        }
    }
    if !block.is_empty() {
        f(block)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChunkStats {
    pub pairs_read: u64,
    pub pairs_skipped: u64,
    pub chunks: u64,
    pub tokens: u64,
}

/// Reads a parallel corpus and writes one chunked skeleton record per pair.
pub fn chunk_stage(source: &Path, target: &Path, out: &Path, cfg: &PipelineConfig) -> Result<ChunkStats> {
    let mut reader = read_parallel(source, target)?;
    let mut writer = corpus::create(out)?;
    let mut stats = ChunkStats::default();
    for_blocks(reader.by_ref(), |block| {
        let records: Vec<NBestRecord> = block
            .into_par_iter()
            .map(|pair| {
                let mut rng = rng::stream(cfg.seed, pair.id, Stage::Chunk);
                let chunked = chunk_sentence(pair.id, &pair.source_tokens, &mut rng, cfg.mean_len)
                    .map_err(stage_err("chunk", pair.id))?;
                Ok(NBestRecord::skeleton(chunked, pair.target_tokens))
            })
            .collect::<Result<_>>()?;
        for rec in &records {
            stats.pairs_read += 1;
            stats.chunks += rec.chunks.len() as u64;
            stats.tokens += rec.source.len() as u64;
            write_record(&mut writer, rec).map_err(io_err(out))?;
        }
        Ok(())
    })?;
    stats.pairs_skipped = reader.skipped();
    writer.flush().map_err(io_err(out))?;
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub pair_id: u64,
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TranslateStats {
    pub translated: u64,
    pub failed_provider: u64,
    pub failed_empty: u64,
}

/// Fills skeleton records with provider hypotheses. Records that fail are
/// skipped and listed in `failures`.
pub fn translate_stage<P: TranslationProvider + ?Sized>(
    input: &Path,
    out: &Path,
    failures: &Path,
    provider: &P,
    opts: &TranslateOptions,
) -> Result<TranslateStats> {
    let mut writer = corpus::create(out)?;
    let mut fail_writer = corpus::create(failures)?;
    let mut stats = TranslateStats::default();
    for_blocks(read_records(input)?, |block| {
        let ids: Vec<u64> = block.iter().map(|r| r.pair_id).collect();
        for (id, result) in ids.into_iter().zip(translate_records(block, provider, opts)) {
            match result {
                Ok(rec) => {
                    stats.translated += 1;
                    write_record(&mut writer, &rec).map_err(io_err(out))?;
                }
                Err(e) => {
                    match e.kind() {
                        FailureKind::Provider => stats.failed_provider += 1,
                        FailureKind::Empty => stats.failed_empty += 1,
                    }
                    let rec = FailureRecord {
                        pair_id: id,
                        kind: e.kind(),
                        message: e.to_string(),
                    };
                    serde_json::to_writer(&mut fail_writer, &rec)
                        .map_err(std::io::Error::from)
                        .and_then(|_| fail_writer.write_all(b"\n"))
                        .map_err(io_err(failures))?;
                }
            }
        }
        Ok(())
    })?;
    writer.flush().map_err(io_err(out))?;
    fail_writer.flush().map_err(io_err(failures))?;
    Ok(stats)
}

/// Sidecar line describing how a candidate was assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMeta {
    pub pair_id: u64,
    pub choice_vector: Vec<usize>,
    pub combination_logprob: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CombineStats {
    pub records: u64,
    pub candidates: u64,
}

pub struct CombineOutputs<'a> {
    pub source: &'a Path,
    pub target: &'a Path,
    pub meta: &'a Path,
}

/// Writes candidate pairs as parallel files (erroneous side, reference side)
/// plus the JSONL sidecar.
pub fn combine_stage(input: &Path, out: &CombineOutputs<'_>, cfg: &PipelineConfig) -> Result<CombineStats> {
    let mut src = corpus::create(out.source)?;
    let mut tgt = corpus::create(out.target)?;
    let mut meta = corpus::create(out.meta)?;
    let mut stats = CombineStats::default();
    for_blocks(read_records(input)?, |block| {
        let combined: Vec<Vec<SyntheticCandidate>> = block
            .par_iter()
            .map(|rec| {
                let mut rng = rng::stream(cfg.seed, rec.pair_id, Stage::Combine);
                combine(rec, &mut rng, cfg.num_outputs).map_err(stage_err("combine", rec.pair_id))
            })
            .collect::<Result<_>>()?;
        stats.records += block.len() as u64;
        for cand in combined.iter().flatten() {
            stats.candidates += 1;
            write_tokens(&mut src, &cand.tokens).map_err(io_err(out.source))?;
            write_tokens(&mut tgt, &cand.reference_tokens).map_err(io_err(out.target))?;
            let line = CandidateMeta {
                pair_id: cand.pair_id,
                choice_vector: cand.choice_vector.clone(),
                combination_logprob: cand.combination_logprob,
            };
            serde_json::to_writer(&mut meta, &line)
                .map_err(std::io::Error::from)
                .and_then(|_| meta.write_all(b"\n"))
                .map_err(io_err(out.meta))?;
        }
        Ok(())
    })?;
    for (w, p) in [
        (&mut src, out.source),
        (&mut tgt, out.target),
        (&mut meta, out.meta),
    ] {
        w.flush().map_err(io_err(p))?;
    }
    Ok(stats)
}

/// Reads two line-aligned plain files without skipping blank lines.
fn read_line_pairs(a: &Path, b: &Path) -> Result<Vec<(Vec<String>, Vec<String>)>> {
    let mut ra = LineReader::open(a)?;
    let mut rb = LineReader::open(b)?;
    let mut out = Vec::new();
    loop {
        let la = ra.next_line()?.map(corpus::tokenize);
        let lb = rb.next_line()?.map(corpus::tokenize);
        match (la, lb) {
            (None, None) => return Ok(out),
            (Some(x), Some(y)) => out.push((x, y)),
            (x, _) => {
                let (mut na, mut nb) = (out.len(), out.len());
                if x.is_some() {
                    na += 1;
                    while ra.next_line()?.is_some() {
                        na += 1;
                    }
                } else {
                    nb += 1;
                    while rb.next_line()?.is_some() {
                        nb += 1;
                    }
                }
                return Err(Error::LineCountMismatch {
                    source_path: a.to_owned(),
                    target_path: b.to_owned(),
                    source_lines: na,
                    target_lines: nb,
                });
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignStats {
    pub aligned: u64,
    /// Candidates with an empty side; written as blank alignment lines.
    pub failed: u64,
}

/// Tags both sides of every candidate with the built-in tagger and writes
/// one rendered alignment per line (blank when a side is empty).
pub fn align_candidates_stage(
    source: &Path,
    target: &Path,
    out: &Path,
    tagger: &Tagger,
    aligner: &Aligner,
) -> Result<AlignStats> {
    let pairs = read_line_pairs(source, target)?;
    let rendered: Vec<Option<String>> = pairs
        .par_iter()
        .map(|(s, t)| {
            if s.is_empty() || t.is_empty() {
                return None;
            }
            Some(aligner.align(&tagger.tag(s), &tagger.tag(t)).render())
        })
        .collect();
    let mut writer = corpus::create(out)?;
    let mut stats = AlignStats::default();
    for line in &rendered {
        match line {
            Some(l) => {
                stats.aligned += 1;
                writeln!(writer, "{l}").map_err(io_err(out))?;
            }
            None => {
                stats.failed += 1;
                writeln!(writer).map_err(io_err(out))?;
            }
        }
    }
    writer.flush().map_err(io_err(out))?;
    Ok(stats)
}

/// Aligns two tagged corpora sentence by sentence.
pub fn align_tagged_files(source: &Path, target: &Path, aligner: &Aligner) -> Result<Vec<AlignmentSequence>> {
    let src: Vec<TaggedSentence> = read_tagged(source)?.collect::<Result<_>>()?;
    let tgt: Vec<TaggedSentence> = read_tagged(target)?.collect::<Result<_>>()?;
    if src.len() != tgt.len() {
        return Err(Error::LineCountMismatch {
            source_path: source.to_owned(),
            target_path: target.to_owned(),
            source_lines: src.len(),
            target_lines: tgt.len(),
        });
    }
    Ok(src
        .par_iter()
        .zip(&tgt)
        .map(|(s, t)| aligner.align(s, t))
        .collect())
}

/// Reads a rendered alignment file; blank lines become `None`.
pub fn read_alignments(path: &Path) -> Result<Vec<Option<Vec<AlignOp>>>> {
    let mut reader = LineReader::open(path)?;
    let mut out = Vec::new();
    while let Some(line) = reader.next_line()? {
        if line.trim().is_empty() {
            out.push(None);
            continue;
        }
        let seq: AlignmentSequence = line
            .parse()
            .map_err(|e: crate::align::ParseOpError| Error::format(path, reader.line_no(), e.to_string()))?;
        out.push(Some(seq.ops));
    }
    Ok(out)
}

/// Where the authentic reference distribution comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReferenceSource {
    /// A distribution TSV.
    Distribution { path: PathBuf },
    /// Rendered alignments, one per line.
    Alignments { path: PathBuf },
    /// Tagged learner sentences and their tagged corrections.
    Tagged { source: PathBuf, target: PathBuf },
}

pub fn load_reference(
    reference: &ReferenceSource,
    smoothing_k: f64,
    aligner: &Aligner,
) -> Result<ErrorDistribution> {
    match reference {
        ReferenceSource::Distribution { path } => ErrorDistribution::load(path),
        ReferenceSource::Alignments { path } => {
            let al = read_alignments(path)?;
            estimate_distribution(al.iter().flatten().map(Vec::as_slice), smoothing_k)
        }
        ReferenceSource::Tagged { source, target } => {
            let al = align_tagged_files(source, target, aligner)?;
            estimate_distribution(al.iter().map(|a| a.ops.as_slice()), smoothing_k)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterStageReport {
    pub failed: u64,
    #[serde(flatten)]
    pub filter: FilterReport,
}

pub struct FilterOutputs<'a> {
    pub source: &'a Path,
    pub target: &'a Path,
}

/// Two passes: score every aligned candidate and calibrate the keep
/// threshold, then copy the kept lines of the candidate files.
pub fn filter_stage(
    candidates_src: &Path,
    candidates_tgt: &Path,
    alignments: &Path,
    dist: &ErrorDistribution,
    keep_ratio: f64,
    out: &FilterOutputs<'_>,
) -> Result<FilterStageReport> {
    let aligned = read_alignments(alignments)?;
    let pairs = read_line_pairs(candidates_src, candidates_tgt)?;
    if pairs.len() != aligned.len() {
        return Err(Error::LineCountMismatch {
            source_path: candidates_src.to_owned(),
            target_path: alignments.to_owned(),
            source_lines: pairs.len(),
            target_lines: aligned.len(),
        });
    }
    let mut index = Vec::new();
    let mut items = Vec::new();
    for (i, (ops, (src, _))) in aligned.iter().zip(&pairs).enumerate() {
        if let Some(ops) = ops {
            index.push(i);
            items.push(FilterItem {
                ops,
                words: src.len(),
            });
        }
    }
    let outcome = filter(&items, dist, keep_ratio);

    let mut src_w = corpus::create(out.source)?;
    let mut tgt_w = corpus::create(out.target)?;
    for (&i, keep) in index.iter().zip(&outcome.keep) {
        if *keep {
            write_tokens(&mut src_w, &pairs[i].0).map_err(io_err(out.source))?;
            write_tokens(&mut tgt_w, &pairs[i].1).map_err(io_err(out.target))?;
        }
    }
    src_w.flush().map_err(io_err(out.source))?;
    tgt_w.flush().map_err(io_err(out.target))?;
    Ok(FilterStageReport {
        failed: (aligned.len() - items.len()) as u64,
        filter: outcome.report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub pairs_read: u64,
    pub pairs_skipped: u64,
    pub chunks: u64,
    pub chunk_mean_len: f64,
    pub records_translated: u64,
    pub records_failed_provider: u64,
    pub records_failed_empty: u64,
    pub candidates_generated: u64,
    pub candidates_kept: u64,
    pub candidates_discarded: u64,
    pub candidates_failed: u64,
    pub words_generated: u64,
    pub words_kept: u64,
    pub sentence_retention: f64,
    pub word_retention: f64,
    pub tv_unfiltered: f64,
    pub tv_kept: f64,
    pub threshold: f64,
    /// Wall-clock per stage; not persisted in `report.json` so that reports
    /// stay reproducible.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    fn assemble(
        chunk: &ChunkStats,
        translate: &TranslateStats,
        combine: &CombineStats,
        filter: &FilterStageReport,
    ) -> Self {
        let f = &filter.filter;
        RunReport {
            pairs_read: chunk.pairs_read,
            pairs_skipped: chunk.pairs_skipped,
            chunks: chunk.chunks,
            chunk_mean_len: if chunk.chunks == 0 {
                0.0
            } else {
                chunk.tokens as f64 / chunk.chunks as f64
            },
            records_translated: translate.translated,
            records_failed_provider: translate.failed_provider,
            records_failed_empty: translate.failed_empty,
            candidates_generated: combine.candidates,
            candidates_kept: f.sentences_kept as u64,
            candidates_discarded: (f.sentences_in - f.sentences_kept) as u64,
            candidates_failed: filter.failed,
            words_generated: f.words_in as u64,
            words_kept: f.words_kept as u64,
            sentence_retention: f.sentence_retention,
            word_retention: f.word_retention,
            tv_unfiltered: f.tv_unfiltered,
            tv_kept: f.tv_kept,
            threshold: f.threshold,
            timings: Vec::new(),
        }
    }

    /// `generated = kept + discarded + failed` and translation counts add up.
    pub fn is_consistent(&self) -> bool {
        self.candidates_generated == self.candidates_kept + self.candidates_discarded + self.candidates_failed
            && self.pairs_read
                == self.records_translated + self.records_failed_provider + self.records_failed_empty
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Inputs recorded in the run manifest next to the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInputs {
    pub source: PathBuf,
    pub target: PathBuf,
    pub reference: ReferenceSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    inputs: RunInputs,
    config: PipelineConfig,
}

/// Runs every stage into `dir`: chunk, translate, combine, tag + align,
/// reference estimation, score + filter.
pub fn run<P: TranslationProvider + ?Sized>(
    cfg: &PipelineConfig,
    inputs: &RunInputs,
    provider: &P,
    dir: &RunDir,
) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(dir.root()).map_err(io_err(dir.root()))?;
    let manifest = Manifest {
        inputs: inputs.clone(),
        config: cfg.clone(),
    };
    let manifest_text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.manifest(), manifest_text).map_err(io_err(&dir.manifest()))?;

    let mut timings = Vec::new();
    let mut timed = |stage: &str, start: Instant| {
        timings.push(StageTiming {
            stage: stage.to_owned(),
            seconds: start.elapsed().as_secs_f64(),
        })
    };

    let t = Instant::now();
    let chunk = chunk_stage(&inputs.source, &inputs.target, &dir.skeletons(), cfg)?;
    timed("chunk", t);

    let t = Instant::now();
    let translate = translate_stage(
        &dir.skeletons(),
        &dir.nbest(),
        &dir.failures(),
        provider,
        &cfg.translate_options(),
    )?;
    timed("translate", t);

    let t = Instant::now();
    let (csrc, ctgt, cmeta) = (dir.candidates_src(), dir.candidates_tgt(), dir.candidates_meta());
    let combine = combine_stage(
        &dir.nbest(),
        &CombineOutputs {
            source: &csrc,
            target: &ctgt,
            meta: &cmeta,
        },
        cfg,
    )?;
    timed("combine", t);

    let t = Instant::now();
    let aligner = Aligner::default();
    align_candidates_stage(&csrc, &ctgt, &dir.alignments(), &Tagger::default(), &aligner)?;
    timed("tag+align", t);

    let t = Instant::now();
    let dist = load_reference(&inputs.reference, cfg.smoothing_k, &aligner)?;
    dist.save(&dir.distribution())?;
    timed("reference", t);

    let t = Instant::now();
    let filtered = filter_stage(
        &csrc,
        &ctgt,
        &dir.alignments(),
        &dist,
        cfg.keep_ratio,
        &FilterOutputs {
            source: &dir.filtered_src(),
            target: &dir.filtered_tgt(),
        },
    )?;
    timed("filter", t);

    let mut report = RunReport::assemble(&chunk, &translate, &combine, &filtered);
    report.timings = timings;
    report.save(&dir.report())?;
    Ok(report)
}

fn count_lines(path: &Path) -> Result<(u64, u64)> {
    let mut reader = LineReader::open(path)?;
    let (mut lines, mut words) = (0, 0);
    while let Some(line) = reader.next_line()? {
        lines += 1;
        words += line.split_whitespace().count() as u64;
    }
    Ok((lines, words))
}

/// Re-derives a run's report from the artifacts in `dir`.
pub fn report(dir: &RunDir) -> Result<RunReport> {
    let text = fs::read_to_string(dir.manifest()).map_err(io_err(&dir.manifest()))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;

    let mut reader = read_parallel(&manifest.inputs.source, &manifest.inputs.target)?;
    for pair in reader.by_ref() {
        pair?;
    }
    let mut chunk = ChunkStats {
        pairs_skipped: reader.skipped(),
        ..Default::default()
    };
    for rec in read_records(&dir.skeletons())? {
        let rec = rec?;
        chunk.pairs_read += 1;
        chunk.chunks += rec.chunks.len() as u64;
        chunk.tokens += rec.source.len() as u64;
    }

    let mut translate = TranslateStats {
        translated: read_records(&dir.nbest())?.try_fold(0u64, |n, r| r.map(|_| n + 1))?,
        ..Default::default()
    };
    let failures = File::open(dir.failures()).map_err(io_err(&dir.failures()))?;
    for line in serde_json::Deserializer::from_reader(BufReader::new(failures)).into_iter::<FailureRecord>() {
        let rec = line.map_err(|e| Error::format(dir.failures(), e.line(), e.to_string()))?;
        match rec.kind {
            FailureKind::Provider => translate.failed_provider += 1,
            FailureKind::Empty => translate.failed_empty += 1,
        }
    }

    let (candidates, _) = count_lines(&dir.candidates_meta())?;
    let combine = CombineStats {
        records: translate.translated,
        candidates,
    };

    let dist = ErrorDistribution::load(&dir.distribution())?;
    let aligned = read_alignments(&dir.alignments())?;
    let (src_lines, _) = count_lines(&dir.candidates_src())?;
    if src_lines != aligned.len() as u64 {
        return Err(Error::format(
            dir.alignments(),
            0,
            "alignment and candidate files differ in length",
        ));
    }
    let words: Vec<usize> = corpus::read_lines_raw(&dir.candidates_src())?
        .iter()
        .map(Vec::len)
        .collect();
    let items: Vec<FilterItem> = aligned
        .iter()
        .zip(&words)
        .filter_map(|(ops, &w)| ops.as_ref().map(|ops| FilterItem { ops, words: w }))
        .collect();
    let mut f = filter(&items, &dist, manifest.config.keep_ratio).report;

    // Kept counts come from the filtered files themselves.
    let (kept, kept_words) = count_lines(&dir.filtered_src())?;
    f.sentences_kept = kept as usize;
    f.words_kept = kept_words as usize;
    f.sentence_retention = if f.sentences_in == 0 {
        0.0
    } else {
        kept as f64 / f.sentences_in as f64
    };
    f.word_retention = if f.words_in == 0 {
        0.0
    } else {
        kept_words as f64 / f.words_in as f64
    };
    let filtered = FilterStageReport {
        failed: (aligned.len() - items.len()) as u64,
        filter: f,
    };
    Ok(RunReport::assemble(&chunk, &translate, &combine, &filtered))
}

/// Runs `f` on a dedicated pool of `jobs` worker threads (all cores when
/// `None`).
pub fn with_workers<T, F>(jobs: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
