//! Quantile-threshold selection of synthetic pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{extract_trigrams, score_pair, CorrectionTrigram, ErrorDistribution};
use crate::align::AlignOp;

/// Score cut-off plus the number of items it should admit. Items scoring
/// strictly above `value` are kept; items scoring exactly `value` fill any
/// remaining quota in input order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub quota: usize,
}

pub fn calibrate_threshold(scores: &[f64], keep_ratio: f64) -> Threshold {
    let n = scores.len();
    let quota = ((keep_ratio.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    if quota == n {
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        return Threshold {
            value: min - 1.0,
            quota,
        };
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Threshold {
        value: sorted[quota],
        quota,
    }
}

pub fn select(scores: &[f64], threshold: &Threshold) -> Vec<bool> {
    let above = scores.iter().filter(|&&s| s > threshold.value).count();
    let mut ties_left = threshold.quota.saturating_sub(above);
    scores
        .iter()
        .map(|&s| {
            if s > threshold.value {
                true
            } else if s == threshold.value && ties_left > 0 {
                ties_left -= 1;
                true
            } else {
                false
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct FilterItem<'a> {
    pub ops: &'a [AlignOp],
    /// Word count credited to the pair for retention statistics.
    pub words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub sentences_in: usize,
    pub sentences_kept: usize,
    pub words_in: usize,
    pub words_kept: usize,
    pub sentence_retention: f64,
    pub word_retention: f64,
    /// Total-variation distance to the reference before filtering.
    pub tv_unfiltered: f64,
    /// Total-variation distance to the reference after filtering.
    pub tv_kept: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub keep: Vec<bool>,
    pub scores: Vec<f64>,
    pub report: FilterReport,
}

/// Total-variation distance between the trigram frequencies of `alignments`
/// and the reference distribution's maximum-likelihood frequencies.
pub fn total_variation<'a, I>(alignments: I, dist: &ErrorDistribution) -> f64
where
    I: IntoIterator<Item = &'a [AlignOp]>,
{
    // Ordered maps keep the float summation order, and so the result bits, fixed.
    let mut counts: BTreeMap<CorrectionTrigram, u64> = BTreeMap::new();
    let mut total = 0u64;
    for ops in alignments {
        for t in extract_trigrams(ops) {
            *counts.entry(t).or_insert(0) += 1;
            total += 1;
        }
    }
    let reference = dist.relative_frequencies();
    let p = |c: u64| if total == 0 { 0.0 } else { c as f64 / total as f64 };
    let mut sum = 0.0;
    for (t, &c) in &counts {
        sum += (p(c) - reference.get(t).copied().unwrap_or(0.0)).abs();
    }
    for (t, q) in &reference {
        if !counts.contains_key(*t) {
            sum += q;
        }
    }
    sum / 2.0
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Scores every item against `dist` and keeps the best `keep_ratio` share.
pub fn filter(items: &[FilterItem<'_>], dist: &ErrorDistribution, keep_ratio: f64) -> FilterOutcome {
    let scores: Vec<f64> = items.iter().map(|it| score_pair(it.ops, dist)).collect();
    let threshold = if scores.is_empty() {
        Threshold { value: 0.0, quota: 0 }
    } else {
        calibrate_threshold(&scores, keep_ratio)
    };
    let keep = select(&scores, &threshold);

    let words_in: usize = items.iter().map(|it| it.words).sum();
    let words_kept: usize = items
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(it, _)| it.words)
        .sum();
    let sentences_kept = keep.iter().filter(|&&k| k).count();
    let tv_unfiltered = total_variation(items.iter().map(|it| it.ops), dist);
    let tv_kept = total_variation(
        items.iter().zip(&keep).filter(|(_, &k)| k).map(|(it, _)| it.ops),
        dist,
    );
    let report = FilterReport {
        sentences_in: items.len(),
        sentences_kept,
        words_in,
        words_kept,
        sentence_retention: ratio(sentences_kept, items.len()),
        word_retention: ratio(words_kept, words_in),
        tv_unfiltered,
        tv_kept,
        threshold: threshold.value,
    };
    FilterOutcome { keep, scores, report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::AlignmentSequence;

    fn kept(scores: &[f64], ratio: f64) -> Vec<f64> {
        let t = calibrate_threshold(scores, ratio);
        scores
            .iter()
            .zip(select(scores, &t))
            .filter(|(_, k)| *k)
            .map(|(s, _)| *s)
            .collect()
    }

    #[test]
    fn keep_all() {
        let scores = [-3.0, -1.0, -7.5];
        let t = calibrate_threshold(&scores, 1.0);
        assert!(t.value < -7.5);
        assert_eq!(kept(&scores, 1.0), scores);
    }

    #[test]
    fn top_forty_percent() {
        // Sort-and-slice oracle: the four largest of 1..=10.
        let scores: Vec<f64> = (1..=10).map(f64::from).collect();
        let mut oracle = scores.clone();
        oracle.sort_by(|a, b| b.total_cmp(a));
        oracle.truncate(4);
        oracle.sort_by(f64::total_cmp);
        assert_eq!(kept(&scores, 0.4), oracle);
    }

    #[test]
    fn ties_fill_quota_in_order() {
        let scores = [2.0; 10];
        let t = calibrate_threshold(&scores, 0.4);
        let k = select(&scores, &t);
        assert_eq!(k.iter().filter(|&&x| x).count(), 4);
        assert_eq!(&k[..4], &[true; 4]);

        let scores = [1.0, 5.0, 5.0, 5.0, 0.0];
        let k = select(&scores, &calibrate_threshold(&scores, 0.4));
        assert_eq!(k, [false, true, true, false, false]);
    }

    #[test]
    fn ratio_one_keeps_everything() {
        let al: Vec<AlignmentSequence> = ["PRP VBD", "NN del(DT) NN", "ins(DT) NN ."]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let mut dist = ErrorDistribution::new(0.5).unwrap();
        dist.add_alignment(&al[0].ops);
        let items: Vec<FilterItem> = al
            .iter()
            .map(|a| FilterItem {
                ops: &a.ops,
                words: a.len(),
            })
            .collect();
        let out = filter(&items, &dist, 1.0);
        assert!(out.keep.iter().all(|&k| k));
        assert_eq!(out.report.word_retention, 1.0);
        assert_eq!(out.report.sentence_retention, 1.0);
    }

    #[test]
    fn tv_of_reference_against_itself_is_zero() {
        let a: AlignmentSequence = "PRP VBD del(VB) ins(DT) ins(JJ) NN .".parse().unwrap();
        let mut dist = ErrorDistribution::new(0.5).unwrap();
        dist.add_alignment(&a.ops);
        assert!(total_variation([a.ops.as_slice()], &dist).abs() < 1e-15);
        let b: AlignmentSequence = "NN".parse().unwrap();
        assert!((total_variation([b.ops.as_slice()], &dist) - 1.0).abs() < 1e-12);
    }
}
