//! Correction-type trigrams and their smoothed distribution.
//!
//! Each alignment item, edit or keep, is the center of one trigram whose
//! context is the neighbouring rendered items (or sentence boundary
//! markers). Authentic learner alignments define the reference
//! distribution; synthetic pairs are scored by the summed log-probability
//! of their trigrams.

mod fbeta;
mod filter;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use fbeta::{f_beta, FBeta, DEFAULT_BETA};
pub use filter::{
    calibrate_threshold, filter, select, total_variation, FilterItem, FilterOutcome, FilterReport, Threshold,
};

use crate::align::AlignOp;
use crate::corpus::LineReader;
use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const DEFAULT_SMOOTHING_K: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CorrectionTrigram {
    pub left: String,
    pub center: String,
    pub right: String,
}

impl CorrectionTrigram {
    pub fn new(left: impl Into<String>, center: impl Into<String>, right: impl Into<String>) -> Self {
        CorrectionTrigram {
            left: left.into(),
            center: center.into(),
            right: right.into(),
        }
    }
}

impl fmt::Display for CorrectionTrigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.center, self.right)
    }
}

pub fn extract_trigrams(ops: &[AlignOp]) -> Vec<CorrectionTrigram> {
    let rendered: Vec<String> = ops.iter().map(ToString::to_string).collect();
    (0..rendered.len())
        .map(|i| CorrectionTrigram {
            left: if i == 0 {
                BOS.to_owned()
            } else {
                rendered[i - 1].clone()
            },
            center: rendered[i].clone(),
            right: rendered.get(i + 1).cloned().unwrap_or_else(|| EOS.to_owned()),
        })
        .collect()
}

/// Additively smoothed trigram distribution with one extra class for all
/// unseen trigrams.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDistribution {
    counts: HashMap<CorrectionTrigram, u64>,
    total: u64,
    smoothing_k: f64,
}

impl ErrorDistribution {
    pub fn new(smoothing_k: f64) -> Result<Self> {
        if !(smoothing_k.is_finite() && smoothing_k > 0.0) {
            return Err(Error::Config(format!(
                "smoothing_k must be > 0, got {smoothing_k}"
            )));
        }
        Ok(ErrorDistribution {
            counts: HashMap::new(),
            total: 0,
            smoothing_k,
        })
    }

    pub fn add(&mut self, trigram: CorrectionTrigram, count: u64) {
        *self.counts.entry(trigram).or_insert(0) += count;
        self.total += count;
    }

    pub fn add_alignment(&mut self, ops: &[AlignOp]) {
        for t in extract_trigrams(ops) {
            self.add(t, 1);
        }
    }

    pub fn merge(&mut self, other: ErrorDistribution) {
        for (t, c) in other.counts {
            self.add(t, c);
        }
    }

    pub fn count(&self, trigram: &CorrectionTrigram) -> u64 {
        self.counts.get(trigram).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn smoothing_k(&self) -> f64 {
        self.smoothing_k
    }

    /// Distinct observed trigrams plus the unseen class.
    pub fn vocab_size(&self) -> usize {
        self.counts.len() + 1
    }

    pub fn counts(&self) -> impl Iterator<Item = (&CorrectionTrigram, u64)> {
        self.counts.iter().map(|(t, &c)| (t, c))
    }

    fn denominator(&self) -> f64 {
        self.total as f64 + self.smoothing_k * self.vocab_size() as f64
    }

    /// `(count + k) / (total + k * vocab_size)`; unseen trigrams share the
    /// count-0 value.
    pub fn prob(&self, trigram: &CorrectionTrigram) -> f64 {
        (self.count(trigram) as f64 + self.smoothing_k) / self.denominator()
    }

    pub fn log_prob(&self, trigram: &CorrectionTrigram) -> f64 {
        self.prob(trigram).ln()
    }

    pub fn unseen_prob(&self) -> f64 {
        self.smoothing_k / self.denominator()
    }

    /// Maximum-likelihood relative frequencies of the observed trigrams, in
    /// trigram order.
    pub fn relative_frequencies(&self) -> BTreeMap<&CorrectionTrigram, f64> {
        let total = self.total as f64;
        self.counts.iter().map(|(t, &c)| (t, c as f64 / total)).collect()
    }

    /// Writes the TSV form: a `#total=<N> #k=<k>` header, then
    /// `left<TAB>center<TAB>right<TAB>count` lines in sorted order.
    pub fn write_tsv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "#total={} #k={}", self.total, self.smoothing_k)?;
        let sorted: BTreeMap<_, _> = self.counts.iter().collect();
        for (t, c) in sorted {
            writeln!(out, "{}\t{}\t{}\t{}", t.left, t.center, t.right, c)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = crate::corpus::create(path)?;
        self.write_tsv(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = LineReader::open(path)?;
        let header = reader
            .next_line()?
            .ok_or_else(|| Error::format(path, 1, "missing header"))?
            .to_owned();
        let (total, k) = parse_header(&header).ok_or_else(|| Error::format(path, 1, "bad header"))?;
        let mut dist = ErrorDistribution::new(k).map_err(|e| Error::format(path, 1, e.to_string()))?;
        while let Some(line) = reader.next_line()? {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let count = match fields.as_slice() {
                [_, _, _, c] => c.parse::<u64>().ok(),
                _ => None,
            };
            let Some(count) = count else {
                return Err(Error::format(
                    path,
                    reader.line_no(),
                    "expected left, center, right, count",
                ));
            };
            dist.add(CorrectionTrigram::new(fields[0], fields[1], fields[2]), count);
        }
        if dist.total != total {
            return Err(Error::format(
                path,
                1,
                format!("header total {total} disagrees with summed counts {}", dist.total),
            ));
        }
        Ok(dist)
    }
}

fn parse_header(line: &str) -> Option<(u64, f64)> {
    let mut total = None;
    let mut k = None;
    for field in line.split_whitespace() {
        if let Some(v) = field.strip_prefix("#total=") {
            total = v.parse().ok();
        } else if let Some(v) = field.strip_prefix("#k=") {
            k = v.parse().ok();
        }
    }
    Some((total?, k?))
}

/// Counts trigrams over a stream of authentic alignments.
pub fn estimate_distribution<'a, I>(alignments: I, smoothing_k: f64) -> Result<ErrorDistribution>
where
    I: IntoIterator<Item = &'a [AlignOp]>,
{
    let mut dist = ErrorDistribution::new(smoothing_k)?;
    let mut any = false;
    for ops in alignments {
        any = true;
        dist.add_alignment(ops);
    }
    if !any {
        return Err(Error::NoReferenceAlignments);
    }
    Ok(dist)
}

/// Sum of the smoothed log-probabilities of the alignment's trigrams.
pub fn score_pair(ops: &[AlignOp], dist: &ErrorDistribution) -> f64 {
    extract_trigrams(ops).iter().map(|t| dist.log_prob(t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::AlignmentSequence;

    fn ops(s: &str) -> Vec<AlignOp> {
        s.parse::<AlignmentSequence>().unwrap().ops
    }

    const UPPER: &str = "PRP VBD del(VB) ins(DT) ins(JJ) NN .";
    const LOWER: &str = "PRP ins(MD) VBP del(DT) DT inf(JJS) NN del(IN) ins(IN) DT typ(NN) ins(.)";

    #[test]
    fn printed_trigrams_are_extracted() {
        let lower = extract_trigrams(&ops(LOWER));
        assert!(lower.contains(&CorrectionTrigram::new("PRP", "ins(MD)", "VBP")));
        let upper = extract_trigrams(&ops(UPPER));
        assert!(upper.contains(&CorrectionTrigram::new("ins(DT)", "ins(JJ)", "NN")));
    }

    #[test]
    fn sliding_window_over_upper() {
        let items: Vec<&str> = UPPER.split(' ').collect();
        let mut padded = vec![BOS];
        padded.extend(&items);
        padded.push(EOS);
        let expected: Vec<CorrectionTrigram> = padded
            .windows(3)
            .map(|w| CorrectionTrigram::new(w[0], w[1], w[2]))
            .collect();
        let got = extract_trigrams(&ops(UPPER));
        assert_eq!(got.len(), 7);
        assert_eq!(got, expected);
        assert_eq!(got[0], CorrectionTrigram::new(BOS, "PRP", "VBD"));
        assert_eq!(got[6], CorrectionTrigram::new("NN", ".", EOS));
    }

    #[test]
    fn single_op() {
        assert_eq!(
            extract_trigrams(&ops("NN")),
            vec![CorrectionTrigram::new(BOS, "NN", EOS)]
        );
    }

    #[test]
    fn estimate_simple_and_linear() {
        let one = ops("PRP VBD");
        let d = estimate_distribution([one.as_slice()], 0.5).unwrap();
        assert_eq!(d.total(), 2);
        assert_eq!(d.count(&CorrectionTrigram::new(BOS, "PRP", "VBD")), 1);
        assert_eq!(d.count(&CorrectionTrigram::new("PRP", "VBD", EOS)), 1);

        let lower = ops(LOWER);
        let single = estimate_distribution([lower.as_slice()], 0.5).unwrap();
        let many = estimate_distribution(std::iter::repeat_n(lower.as_slice(), 7), 0.5).unwrap();
        for (t, c) in single.counts() {
            assert_eq!(many.count(t), 7 * c);
        }
        assert_eq!(many.total(), 7 * single.total());
    }

    #[test]
    fn empty_stream_is_an_error() {
        let err = estimate_distribution(std::iter::empty::<&[AlignOp]>(), 0.5).unwrap_err();
        assert_eq!(err.to_string(), "no reference alignments");
    }

    #[test]
    fn probabilities_normalize() {
        let d = estimate_distribution([ops(UPPER).as_slice(), ops(LOWER).as_slice()], 0.5).unwrap();
        let observed: f64 = d.counts().map(|(t, _)| d.prob(t)).sum();
        assert!((observed + d.unseen_prob() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unseen_floor_score() {
        let d = estimate_distribution([ops("PRP VBD").as_slice()], 0.5).unwrap();
        let probe = ops("NN NNS JJ");
        let expected = 3.0 * (0.5f64 / (2.0 + 0.5 * 3.0)).ln();
        assert!((score_pair(&probe, &d) - expected).abs() < 1e-12);
    }

    #[test]
    fn tsv_round_trip_and_header_check() {
        let d = estimate_distribution([ops(UPPER).as_slice(), ops(LOWER).as_slice()], 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("dist.tsv");
        d.save(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("#total=19 #k=0.5\n"));
        assert_eq!(ErrorDistribution::load(&p).unwrap(), d);

        std::fs::write(&p, "#total=3 #k=0.5\n<s>\tNN\t</s>\t2\n").unwrap();
        assert!(ErrorDistribution::load(&p).is_err());
    }

    #[test]
    fn invalid_smoothing() {
        assert!(ErrorDistribution::new(0.0).is_err());
        assert!(ErrorDistribution::new(-1.0).is_err());
    }
}
