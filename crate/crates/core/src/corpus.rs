//! Streaming readers and writers for the on-disk corpus formats.
//!
//! Parallel corpora are two UTF-8 files with one pre-tokenized sentence per
//! line; line `i` of each file forms one pair. Tagged corpora carry one
//! `surface<TAB>tag` token per line with a blank line after each sentence.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tagset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: u64,
    pub source_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: String,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, tag: impl Into<String>) -> Self {
        TaggedToken {
            surface: surface.into(),
            tag: tag.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<TaggedToken>) -> Self {
        TaggedSentence { tokens }
    }

    /// Builds a sentence from `surface/TAG` items separated by whitespace,
    /// splitting each item at its last slash.
    pub fn from_slashed(text: &str) -> Option<Self> {
        let tokens = text
            .split_whitespace()
            .map(|item| {
                let (surface, tag) = item.rsplit_once('/')?;
                Some(TaggedToken::new(surface, tag))
            })
            .collect::<Option<Vec<_>>>()?;
        Some(TaggedSentence { tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.tag.as_str())
    }
}

pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_owned).collect()
}

/// Reads UTF-8 lines one at a time while tracking byte offsets, so decoding
/// failures can be reported precisely.
pub(crate) struct LineReader<R> {
    inner: R,
    path: PathBuf,
    offset: u64,
    buf: Vec<u8>,
    line_no: usize,
}

impl LineReader<BufReader<File>> {
    pub(crate) fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(LineReader::new(BufReader::new(file), path))
    }
}

impl<R: BufRead> LineReader<R> {
    pub(crate) fn new(inner: R, path: &Path) -> Self {
        LineReader {
            inner,
            path: path.to_owned(),
            offset: 0,
            buf: Vec::new(),
            line_no: 0,
        }
    }

    /// 1-based number of the line most recently returned.
    pub(crate) fn line_no(&self) -> usize {
        self.line_no
    }

    pub(crate) fn path(&self) -> &Path {
        &self.path
    }

    /// Next line without its terminator, or `None` at end of input.
    pub(crate) fn next_line(&mut self) -> Result<Option<&str>> {
        self.buf.clear();
        let start = self.offset;
        let n = self
            .inner
            .read_until(b'\n', &mut self.buf)
            .map_err(|e| Error::io(&self.path, e))?;
        if n == 0 {
            return Ok(None);
        }
        self.offset += n as u64;
        self.line_no += 1;
        if self.buf.ends_with(b"\n") {
            self.buf.pop();
            if self.buf.ends_with(b"\r") {
                self.buf.pop();
            }
        }
        match std::str::from_utf8(&self.buf) {
            Ok(s) => Ok(Some(s)),
            Err(e) => Err(Error::InvalidUtf8 {
                path: self.path.clone(),
                offset: start + e.valid_up_to() as u64,
            }),
        }
    }
}

/// Iterator over the sentence pairs of a parallel corpus.
///
/// Pairs where either side is blank are skipped and counted. A line-count
/// mismatch surfaces as the final item once the shorter file is exhausted.
pub struct ParallelReader<R> {
    source: LineReader<R>,
    target: LineReader<R>,
    line: u64,
    skipped: u64,
    done: bool,
}

pub fn read_parallel(source_path: &Path, target_path: &Path) -> Result<ParallelReader<BufReader<File>>> {
    Ok(ParallelReader {
        source: LineReader::open(source_path)?,
        target: LineReader::open(target_path)?,
        line: 0,
        skipped: 0,
        done: false,
    })
}

impl<R: BufRead> ParallelReader<R> {
    /// Number of pairs skipped so far because one side was blank.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    fn remaining_lines(reader: &mut LineReader<R>) -> Result<usize> {
        let mut n = 0;
        while reader.next_line()?.is_some() {
            n += 1;
        }
        Ok(n)
    }

    fn advance(&mut self) -> Result<Option<SentencePair>> {
        loop {
            let src = self.source.next_line()?.map(tokenize);
            let tgt = self.target.next_line()?.map(tokenize);
            let (src, tgt) = match (src, tgt) {
                (None, None) => return Ok(None),
                (Some(_), None) => {
                    let extra = 1 + Self::remaining_lines(&mut self.source)?;
                    return Err(self.mismatch(self.line as usize + extra, self.line as usize));
                }
                (None, Some(_)) => {
                    let extra = 1 + Self::remaining_lines(&mut self.target)?;
                    return Err(self.mismatch(self.line as usize, self.line as usize + extra));
                }
                (Some(s), Some(t)) => (s, t),
            };
            let id = self.line;
            self.line += 1;
            if src.is_empty() || tgt.is_empty() {
                self.skipped += 1;
                continue;
            }
            return Ok(Some(SentencePair {
                id,
                source_tokens: src,
                target_tokens: tgt,
            }));
        }
    }

    fn mismatch(&self, source_lines: usize, target_lines: usize) -> Error {
        Error::LineCountMismatch {
            source_path: self.source.path().to_owned(),
            target_path: self.target.path().to_owned(),
            source_lines,
            target_lines,
        }
    }
}

impl<R: BufRead> Iterator for ParallelReader<R> {
    type Item = Result<SentencePair>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.advance() {
            Ok(Some(pair)) => Some(Ok(pair)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Keeps the first pair for each distinct target token sequence.
pub struct DedupByTarget<I> {
    inner: I,
    seen: HashSet<Vec<String>>,
    dropped: u64,
}

pub fn dedup_by_target<I>(pairs: I) -> DedupByTarget<I::IntoIter>
where
    I: IntoIterator<Item = SentencePair>,
{
    DedupByTarget {
        inner: pairs.into_iter(),
        seen: HashSet::new(),
        dropped: 0,
    }
}

impl<I> DedupByTarget<I> {
    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}

impl<I: Iterator<Item = SentencePair>> Iterator for DedupByTarget<I> {
    type Item = SentencePair;

    fn next(&mut self) -> Option<SentencePair> {
        for pair in self.inner.by_ref() {
            if self.seen.contains(&pair.target_tokens) {
                self.dropped += 1;
                continue;
            }
            self.seen.insert(pair.target_tokens.clone());
            return Some(pair);
        }
        None
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn write_tokens<W: Write>(out: &mut W, tokens: &[String]) -> std::io::Result<()> {
    let mut first = true;
    for tok in tokens {
        if !first {
            out.write_all(b" ")?;
        }
        out.write_all(tok.as_bytes())?;
        first = false;
    }
    out.write_all(b"\n")
}

/// Writes pairs as two one-sentence-per-line files and returns the count.
pub fn write_pairs<'a, I>(pairs: I, out_source: &Path, out_target: &Path) -> Result<u64>
where
    I: IntoIterator<Item = &'a SentencePair>,
{
    let mut src = create(out_source)?;
    let mut tgt = create(out_target)?;
    let mut count = 0;
    for pair in pairs {
        write_tokens(&mut src, &pair.source_tokens).map_err(|e| Error::io(out_source, e))?;
        write_tokens(&mut tgt, &pair.target_tokens).map_err(|e| Error::io(out_target, e))?;
        count += 1;
    }
    src.flush().map_err(|e| Error::io(out_source, e))?;
    tgt.flush().map_err(|e| Error::io(out_target, e))?;
    Ok(count)
}

/// Iterator over the sentences of a tagged corpus.
pub struct TaggedReader<R> {
    lines: LineReader<R>,
    done: bool,
}

pub fn read_tagged(path: &Path) -> Result<TaggedReader<BufReader<File>>> {
    Ok(TaggedReader {
        lines: LineReader::open(path)?,
        done: false,
    })
}

impl<R: BufRead> TaggedReader<R> {
    pub fn from_reader(reader: R, path: &Path) -> Self {
        TaggedReader {
            lines: LineReader::new(reader, path),
            done: false,
        }
    }

    fn advance(&mut self) -> Result<Option<TaggedSentence>> {
        let mut tokens = Vec::new();
        loop {
            let line_no = self.lines.line_no() + 1;
            let path = self.lines.path().to_owned();
            let Some(line) = self.lines.next_line()? else {
                break;
            };
            if line.trim().is_empty() {
                if tokens.is_empty() {
                    continue;
                }
                break;
            }
            let mut fields = line.split('\t');
            let (Some(surface), Some(tag), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::format(path, line_no, "expected exactly one tab"));
            };
            if !tagset::is_valid_tag(tag) {
                return Err(Error::format(path, line_no, format!("unknown tag {tag:?}")));
            }
            tokens.push(TaggedToken::new(surface, tag));
        }
        Ok((!tokens.is_empty()).then(|| TaggedSentence::new(tokens)))
    }
}

impl<R: BufRead> Iterator for TaggedReader<R> {
    type Item = Result<TaggedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.advance().transpose();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

pub fn write_tagged_sentence<W: Write>(out: &mut W, sentence: &TaggedSentence) -> std::io::Result<()> {
    for tok in &sentence.tokens {
        writeln!(out, "{}\t{}", tok.surface, tok.tag)?;
    }
    writeln!(out)
}

/// Reads a plain one-sentence-per-line file, skipping blank lines.
pub fn read_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = LineReader::open(path)?;
    let mut out = Vec::new();
    while let Some(line) = reader.next_line()? {
        let toks = tokenize(line);
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    Ok(out)
}

/// Like [`read_lines`] but keeps blank lines as empty token lists.
pub fn read_lines_raw(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = LineReader::open(path)?;
    let mut out = Vec::new();
    while let Some(line) = reader.next_line()? {
        out.push(tokenize(line));
    }
    Ok(out)
}
