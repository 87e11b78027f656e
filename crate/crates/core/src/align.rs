//! Edit-distance alignment of an erroneous tagged sentence to its correction.
//!
//! A dynamic program over token positions chooses, for each step, one of
//! keep, inflection change, typo fix (all consuming a token from each side),
//! deletion of a source token or insertion of a target token. Pairs of
//! tokens that are unrelated are never substituted: their cost exceeds a
//! deletion plus an insertion, so they always decompose into `del` + `ins`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{TaggedSentence, TaggedToken};
use crate::tagset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Keep,
    Ins,
    Del,
    Inf,
    Typ,
}

impl OpKind {
    fn prefix(self) -> Option<&'static str> {
        match self {
            OpKind::Keep => None,
            OpKind::Ins => Some("ins"),
            OpKind::Del => Some("del"),
            OpKind::Inf => Some("inf"),
            OpKind::Typ => Some("typ"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignOp {
    pub kind: OpKind,
    /// Target tag for keep/inf/typ/ins, source tag for del.
    pub tag: String,
    pub src_index: Option<usize>,
    pub tgt_index: Option<usize>,
}

impl fmt::Display for AlignOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind.prefix() {
            None => f.write_str(&self.tag),
            Some(p) => write!(f, "{p}({})", self.tag),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSequence {
    pub ops: Vec<AlignOp>,
    pub total_cost: f64,
}

impl AlignmentSequence {
    /// Space-separated rendered ops, e.g. `PRP VBD del(VB) ins(DT)`.
    pub fn render(&self) -> String {
        render_ops(&self.ops)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

impl fmt::Display for AlignmentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render_ops(ops: &[AlignOp]) -> String {
    let mut out = String::new();
    for (i, op) in ops.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&op.to_string());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse alignment op {0:?}")]
pub struct ParseOpError(pub String);

/// Parses a rendered alignment line, reconstructing source and target
/// indices from the op kinds. The cost is not recoverable and is set to 0.
impl FromStr for AlignmentSequence {
    type Err = ParseOpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut i, mut j) = (0, 0);
        let mut ops = Vec::new();
        for item in s.split_whitespace() {
            let (kind, tag) = [OpKind::Ins, OpKind::Del, OpKind::Inf, OpKind::Typ]
                .into_iter()
                .find_map(|k| {
                    let inner = item
                        .strip_prefix(k.prefix()?)?
                        .strip_prefix('(')?
                        .strip_suffix(')')?;
                    Some((k, inner))
                })
                .unwrap_or((OpKind::Keep, item));
            if !tagset::is_valid_tag(tag) {
                return Err(ParseOpError(item.to_owned()));
            }
            let (src, tgt) = match kind {
                OpKind::Ins => (None, Some(j)),
                OpKind::Del => (Some(i), None),
                _ => (Some(i), Some(j)),
            };
            i += src.is_some() as usize;
            j += tgt.is_some() as usize;
            ops.push(AlignOp {
                kind,
                tag: tag.to_owned(),
                src_index: src,
                tgt_index: tgt,
            });
        }
        Ok(AlignmentSequence { ops, total_cost: 0.0 })
    }
}

/// Costs and thresholds of the alignment heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub insert: f64,
    pub delete: f64,
    /// Keep of tokens equal up to case.
    pub case_keep: f64,
    /// Typo cost is `typo_base + typo_scale * d` for normalized distance `d`.
    pub typo_base: f64,
    pub typo_scale: f64,
    pub typo_max_distance: f64,
    pub inflection: f64,
    pub unrelated: f64,
    /// Required shared prefix length, capped at the shorter token's length.
    pub stem_prefix: usize,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            insert: 1.0,
            delete: 1.0,
            case_keep: 0.1,
            typo_base: 0.5,
            typo_scale: 0.5,
            typo_max_distance: 0.5,
            inflection: 0.5,
            unrelated: 2.2,
            stem_prefix: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Keep,
    Inf,
    Typ,
    Unrelated,
}

/// Character-level Levenshtein distance with unit costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let next = (row[j + 1] + 1).min(row[j] + 1).min(diag + (ca != cb) as usize);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

fn common_prefix_len(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count()
}

impl CostModel {
    /// Classifies a source/target token pair and returns the substitution cost.
    pub fn classify(&self, src: &TaggedToken, tgt: &TaggedToken) -> (PairClass, f64) {
        if src.surface == tgt.surface {
            return (PairClass::Keep, 0.0);
        }
        let a = src.surface.to_lowercase();
        let b = tgt.surface.to_lowercase();
        if a == b {
            return (PairClass::Keep, self.case_keep);
        }
        let (la, lb) = (a.chars().count(), b.chars().count());
        if src.tag == tgt.tag {
            let d = levenshtein(&a, &b) as f64 / la.max(lb) as f64;
            if d > 0.0 && d <= self.typo_max_distance {
                return (PairClass::Typ, self.typo_base + self.typo_scale * d);
            }
        } else if tagset::coarse(&src.tag) == tagset::coarse(&tgt.tag)
            && common_prefix_len(&a, &b) >= self.stem_prefix.min(la.min(lb))
        {
            return (PairClass::Inf, self.inflection);
        }
        (PairClass::Unrelated, self.unrelated)
    }
}

pub fn classify_pair(src: &TaggedToken, tgt: &TaggedToken) -> PairClass {
    CostModel::default().classify(src, tgt).0
}

#[derive(Debug, Clone, Default)]
pub struct Aligner {
    pub costs: CostModel,
}

const EPS: f64 = 1e-9;

impl Aligner {
    pub fn new(costs: CostModel) -> Self {
        Aligner { costs }
    }

    /// Minimum-cost alignment. Among optimal alignments the traceback prefers
    /// a diagonal step, then an insertion, then a deletion, walking from the
    /// end; read forward this puts deletions before insertions.
    pub fn align(&self, source: &TaggedSentence, target: &TaggedSentence) -> AlignmentSequence {
        let src = &source.tokens;
        let tgt = &target.tokens;
        let (m, n) = (src.len(), tgt.len());
        let c = &self.costs;
        let width = n + 1;

        let mut pair = vec![(PairClass::Unrelated, f64::INFINITY); m * n];
        for i in 0..m {
            for j in 0..n {
                let (class, cost) = c.classify(&src[i], &tgt[j]);
                if class != PairClass::Unrelated {
                    pair[i * n + j] = (class, cost);
                }
            }
        }

        let mut dp = vec![0.0f64; (m + 1) * width];
        for i in 1..=m {
            dp[i * width] = dp[(i - 1) * width] + c.delete;
        }
        for j in 1..=n {
            dp[j] = dp[j - 1] + c.insert;
        }
        for i in 1..=m {
            for j in 1..=n {
                let del = dp[(i - 1) * width + j] + c.delete;
                let ins = dp[i * width + j - 1] + c.insert;
                let sub = dp[(i - 1) * width + j - 1] + pair[(i - 1) * n + j - 1].1;
                dp[i * width + j] = del.min(ins).min(sub);
            }
        }

        let mut ops = Vec::with_capacity(m + n);
        let (mut i, mut j) = (m, n);
        while i > 0 || j > 0 {
            let here = dp[i * width + j];
            if i > 0 && j > 0 {
                let (class, cost) = pair[(i - 1) * n + j - 1];
                if cost.is_finite() && (dp[(i - 1) * width + j - 1] + cost - here).abs() < EPS {
                    let kind = match class {
                        PairClass::Keep => OpKind::Keep,
                        PairClass::Inf => OpKind::Inf,
                        PairClass::Typ => OpKind::Typ,
                        PairClass::Unrelated => unreachable!(),
                    };
                    ops.push(AlignOp {
                        kind,
                        tag: tgt[j - 1].tag.clone(),
                        src_index: Some(i - 1),
                        tgt_index: Some(j - 1),
                    });
                    i -= 1;
                    j -= 1;
                    continue;
                }
            }
            if j > 0 && (dp[i * width + j - 1] + c.insert - here).abs() < EPS {
                ops.push(AlignOp {
                    kind: OpKind::Ins,
                    tag: tgt[j - 1].tag.clone(),
                    src_index: None,
                    tgt_index: Some(j - 1),
                });
                j -= 1;
            } else {
                ops.push(AlignOp {
                    kind: OpKind::Del,
                    tag: src[i - 1].tag.clone(),
                    src_index: Some(i - 1),
                    tgt_index: None,
                });
                i -= 1;
            }
        }
        ops.reverse();
        AlignmentSequence {
            ops,
            total_cost: dp[m * width + n],
        }
    }
}

/// Aligns with the default cost model.
pub fn align(source: &TaggedSentence, target: &TaggedSentence) -> AlignmentSequence {
    Aligner::default().align(source, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tagged(s: &str) -> TaggedSentence {
        TaggedSentence::from_slashed(s).unwrap()
    }

    fn tok(s: &str, t: &str) -> TaggedToken {
        TaggedToken::new(s, t)
    }

    #[test]
    fn learner_example() {
        let a = align(
            &tagged("We/PRP had/VBD enjoy/VB time/NN ./."),
            &tagged("We/PRP had/VBD a/DT great/JJ time/NN ./."),
        );
        assert_eq!(a.render(), "PRP VBD del(VB) ins(DT) ins(JJ) NN .");
        assert!((a.total_cost - 3.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_example() {
        let a = align(
            &tagged("You/PRP be/VBP the/DT the/DT old/JJ donkey/NN of/IN the/DT forestry/NN"),
            &tagged("You/PRP 'll/MD be/VBP the/DT oldest/JJS donkey/NN in/IN the/DT forest/NN ./."),
        );
        assert_eq!(
            a.render(),
            "PRP ins(MD) VBP del(DT) DT inf(JJS) NN del(IN) ins(IN) DT typ(NN) ins(.)"
        );
        assert!((a.total_cost - 6.125).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_pair(&tok("old", "JJ"), &tok("oldest", "JJS")),
            PairClass::Inf
        );
        assert_eq!(
            classify_pair(&tok("forestry", "NN"), &tok("forest", "NN")),
            PairClass::Typ
        );
        assert_eq!(
            classify_pair(&tok("of", "IN"), &tok("in", "IN")),
            PairClass::Unrelated
        );
        assert_eq!(
            classify_pair(&tok("The", "DT"), &tok("the", "DT")),
            PairClass::Keep
        );
        assert_eq!(
            classify_pair(&tok("go", "VB"), &tok("went", "VBD")),
            PairClass::Unrelated
        );
    }

    #[test]
    fn case_only_difference_costs_a_little() {
        let a = align(&tagged("Hospital/NN"), &tagged("hospital/NN"));
        assert_eq!(a.render(), "NN");
        assert!((a.total_cost - 0.1).abs() < 1e-12);
    }

    #[test]
    fn typo_cost_scales_with_distance() {
        let (class, cost) = CostModel::default().classify(&tok("forestry", "NN"), &tok("forest", "NN"));
        assert_eq!(class, PairClass::Typ);
        assert!((cost - 0.625).abs() < 1e-12);
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("ab", "ba"), 2);
        assert_eq!(levenshtein("äö", "äo"), 1);
    }

    #[test]
    fn parse_round_trip() {
        let line = "PRP ins(MD) VBP del(DT) DT inf(JJS) NN del(IN) ins(IN) DT typ(NN) ins(.)";
        let seq: AlignmentSequence = line.parse().unwrap();
        assert_eq!(seq.render(), line);
        let a = align(
            &tagged("You/PRP be/VBP the/DT the/DT old/JJ donkey/NN of/IN the/DT forestry/NN"),
            &tagged("You/PRP 'll/MD be/VBP the/DT oldest/JJS donkey/NN in/IN the/DT forest/NN ./."),
        );
        assert_eq!(seq.ops, a.ops);
        assert!("PRP ins(XX)".parse::<AlignmentSequence>().is_err());
    }

    fn sentence() -> impl Strategy<Value = TaggedSentence> {
        let words = prop::sample::select(vec!["run", "runs", "ran", "cat", "cats", "Cat", "the", "a"]);
        let tags = prop::sample::select(vec!["NN", "NNS", "VB", "VBD", "DT", "JJ"]);
        prop::collection::vec((words, tags), 1..10)
            .prop_map(|v| TaggedSentence::new(v.into_iter().map(|(w, t)| TaggedToken::new(w, t)).collect()))
    }

    proptest! {
        #[test]
        fn ops_cover_both_sides(src in sentence(), tgt in sentence()) {
            let a = align(&src, &tgt);
            let s: Vec<usize> = a.ops.iter().filter_map(|o| o.src_index).collect();
            let t: Vec<usize> = a.ops.iter().filter_map(|o| o.tgt_index).collect();
            prop_assert_eq!(s, (0..src.len()).collect::<Vec<_>>());
            prop_assert_eq!(t, (0..tgt.len()).collect::<Vec<_>>());
            for op in &a.ops {
                match op.kind {
                    OpKind::Ins => prop_assert!(op.src_index.is_none() && op.tgt_index.is_some()),
                    OpKind::Del => prop_assert!(op.src_index.is_some() && op.tgt_index.is_none()),
                    _ => prop_assert!(op.src_index.is_some() && op.tgt_index.is_some()),
                }
            }
            let parsed: AlignmentSequence = a.render().parse().unwrap();
            prop_assert_eq!(parsed.ops, a.ops);
        }

        #[test]
        fn self_alignment_is_all_keep(s in sentence()) {
            let a = align(&s, &s);
            prop_assert!(a.ops.iter().all(|o| o.kind == OpKind::Keep));
            prop_assert_eq!(a.total_cost, 0.0);
        }
    }
}
