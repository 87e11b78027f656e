//! The closed Penn Treebank tag inventory.

/// Word-level Penn Treebank tags.
pub const WORD_TAGS: &[&str] = &[
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS", "PDT",
    "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG", "VBN", "VBP",
    "VBZ", "WDT", "WP", "WP$", "WRB",
];

/// Punctuation and bracket tags, including the later OntoNotes additions.
pub const PUNCT_TAGS: &[&str] = &[
    ".", ",", ":", "``", "''", "-LRB-", "-RRB-", "(", ")", "#", "$", "HYPH", "NFP", "AFX", "ADD",
];

pub fn is_valid_tag(tag: &str) -> bool {
    WORD_TAGS.contains(&tag) || PUNCT_TAGS.contains(&tag)
}

/// Coarse POS class of a fine tag: `NN`, `VB`, `JJ`, `RB` families collapse
/// to their two-letter prefix, `PRP$`/`WP$` to `PRP`/`WP`; every other tag is
/// its own class.
pub fn coarse(tag: &str) -> &str {
    for family in ["NN", "VB", "JJ", "RB"] {
        if tag.starts_with(family) {
            return family;
        }
    }
    match tag {
        "PRP$" => "PRP",
        "WP$" => "WP",
        other => other,
    }
}
