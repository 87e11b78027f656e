//! N-best records and their JSON Lines persistence.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chunker::ChunkedSentence;
use crate::corpus::LineReader;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub tokens: Vec<String>,
    /// Natural-log probability.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBestChunk {
    pub tokens: Vec<String>,
    pub hyps: Vec<Hypothesis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBestRecord {
    pub pair_id: u64,
    pub source: Vec<String>,
    pub reference: Vec<String>,
    pub chunks: Vec<NBestChunk>,
}

impl NBestRecord {
    /// A record with no hypotheses yet, as emitted by the chunking stage.
    pub fn skeleton(chunked: ChunkedSentence, reference: Vec<String>) -> Self {
        let source = chunked.tokens().cloned().collect();
        NBestRecord {
            pair_id: chunked.pair_id,
            source,
            reference,
            chunks: chunked
                .chunks
                .into_iter()
                .map(|tokens| NBestChunk {
                    tokens,
                    hyps: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn chunk_texts(&self) -> impl Iterator<Item = String> + '_ {
        self.chunks.iter().map(|c| c.tokens.join(" "))
    }
}

/// Streams records from a JSONL file, one per non-blank line.
pub struct RecordReader {
    lines: LineReader<BufReader<File>>,
    done: bool,
}

pub fn read_records(path: &Path) -> Result<RecordReader> {
    Ok(RecordReader {
        lines: LineReader::open(path)?,
        done: false,
    })
}

impl Iterator for RecordReader {
    type Item = Result<NBestRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let path: PathBuf = self.lines.path().to_owned();
            let line = match self.lines.next_line() {
                Ok(Some(line)) => line,
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let item = serde_json::from_str(line)
                .map_err(|e| Error::format(path, self.lines.line_no(), e.to_string()));
            if item.is_err() {
                self.done = true;
            }
            return Some(item);
        }
        None
    }
}

pub fn write_record<W: Write>(out: &mut W, record: &NBestRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}
