//! Lexicon plus suffix/shape rule POS tagger producing Penn Treebank tags.
//!
//! Lookup order for each token: punctuation shape, exact lexicon entry,
//! lowercased entry for the sentence-initial token, capitalization (`NNP`),
//! numerals (`CD`), then suffix rules with `NN` as the fallback. A single
//! contextual rule retags a base-form `VBP` as `VB` after a modal or `to`.

use std::collections::HashMap;
use std::path::Path;

use crate::corpus::{LineReader, TaggedSentence, TaggedToken};
use crate::error::{Error, Result};
use crate::tagset;

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone)]
pub struct Tagger {
    lexicon: HashMap<String, String>,
}

impl Default for Tagger {
    fn default() -> Self {
        Tagger::from_tsv(DEFAULT_LEXICON, Path::new("<builtin lexicon>"))
            .expect("builtin lexicon is well-formed")
    }
}

const SUFFIX_RULES: &[(&str, &str)] = &[
    ("ly", "RB"),
    ("ing", "VBG"),
    ("ed", "VBD"),
    ("ness", "NN"),
    ("ment", "NN"),
    ("tion", "NN"),
    ("sion", "NN"),
    ("ity", "NN"),
    ("ship", "NN"),
    ("ism", "NN"),
    ("ance", "NN"),
    ("ence", "NN"),
    ("ous", "JJ"),
    ("ful", "JJ"),
    ("able", "JJ"),
    ("ible", "JJ"),
    ("ive", "JJ"),
    ("less", "JJ"),
    ("ish", "JJ"),
    ("ical", "JJ"),
    ("ic", "JJ"),
    ("al", "JJ"),
    ("ize", "VB"),
    ("ise", "VB"),
    ("ify", "VB"),
];

fn punct_tag(tok: &str) -> Option<&'static str> {
    if !tok
        .chars()
        .all(|c| c.is_ascii_punctuation() || c == '…' || c == '–' || c == '—')
    {
        return None;
    }
    Some(match tok {
        "." | "!" | "?" | "?!" | "!!" => ".",
        "," => ",",
        "``" | "\"" => "``",
        "''" | "'" => "''",
        "(" | "[" | "{" => "-LRB-",
        ")" | "]" | "}" => "-RRB-",
        "$" => "$",
        "#" => "#",
        "-" => "HYPH",
        _ if tok.chars().all(|c| c == '.' || c == '…') => ":",
        ":" | ";" | "--" | "–" | "—" => ":",
        _ => "SYM",
    })
}

fn is_numeral(tok: &str) -> bool {
    tok.chars().any(|c| c.is_ascii_digit())
        && tok
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '/' | ':' | '%'))
}

fn suffix_tag(lower: &str) -> &'static str {
    let n = lower.chars().count();
    if n >= 5 && lower.ends_with("est") {
        return "JJS";
    }
    for (suffix, tag) in SUFFIX_RULES {
        if n > suffix.len() + 1 && lower.ends_with(suffix) {
            return tag;
        }
    }
    if lower.contains('-') && n > 3 {
        return "JJ";
    }
    if n > 3
        && lower.ends_with('s')
        && !lower.ends_with("ss")
        && !lower.ends_with("us")
        && !lower.ends_with("is")
    {
        return "NNS";
    }
    "NN"
}

impl Tagger {
    /// Parses a `surface<TAB>tag` lexicon. Later entries override earlier ones.
    pub fn from_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut lexicon = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((surface, tag)) = line.split_once('\t') else {
                return Err(Error::format(origin, i + 1, "expected surface<TAB>tag"));
            };
            if tag.contains('\t') || !tagset::is_valid_tag(tag) {
                return Err(Error::format(origin, i + 1, format!("bad tag {tag:?}")));
            }
            lexicon.insert(surface.to_owned(), tag.to_owned());
        }
        Ok(Tagger { lexicon })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut reader = LineReader::open(path)?;
        let mut text = String::new();
        while let Some(line) = reader.next_line()? {
            text.push_str(line);
            text.push('\n');
        }
        Tagger::from_tsv(&text, path)
    }

    pub fn lexicon_len(&self) -> usize {
        self.lexicon.len()
    }

    fn tag_token(&self, tok: &str, initial: bool) -> String {
        if let Some(tag) = punct_tag(tok) {
            return tag.to_owned();
        }
        if let Some(tag) = self.lexicon.get(tok) {
            return tag.clone();
        }
        let lower = tok.to_lowercase();
        let capitalized = tok.chars().next().is_some_and(char::is_uppercase);
        if initial || !capitalized {
            if let Some(tag) = self.lexicon.get(&lower) {
                return tag.clone();
            }
        }
        if is_numeral(tok) {
            return "CD".to_owned();
        }
        if capitalized && !initial {
            return "NNP".to_owned();
        }
        suffix_tag(&lower).to_owned()
    }

    pub fn tag<S: AsRef<str>>(&self, tokens: &[S]) -> TaggedSentence {
        let mut out: Vec<TaggedToken> = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let tok = tok.as_ref();
            let mut tag = self.tag_token(tok, i == 0);
            if tag == "VBP" && out.last().is_some_and(|p| p.tag == "MD" || p.tag == "TO") {
                tag = "VB".to_owned();
            }
            out.push(TaggedToken::new(tok, tag));
        }
        TaggedSentence::new(out)
    }
}

/// Input to the tagging stage: either raw tokens or an already tagged
/// sentence.
#[derive(Debug, Clone, PartialEq)]
pub enum TagInput {
    Tokens(Vec<String>),
    Tagged(TaggedSentence),
}

pub fn tag_or_passthrough(tagger: &Tagger, input: TagInput) -> TaggedSentence {
    match input {
        TagInput::Tokens(tokens) => tagger.tag(&tokens),
        TagInput::Tagged(sentence) => sentence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn tags(s: &str) -> Vec<String> {
        Tagger::default()
            .tag(&tokenize(s))
            .tags()
            .map(str::to_owned)
            .collect()
    }

    #[test]
    fn learner_correction_sentence() {
        assert_eq!(
            tags("We had a great time ."),
            ["PRP", "VBD", "DT", "JJ", "NN", "."]
        );
    }

    #[test]
    fn lone_period() {
        assert_eq!(tags("."), ["."]);
    }

    #[test]
    fn shape_and_suffix_rules() {
        assert_eq!(
            tags("She quickly visited Helsinki in 1999 with 3,500 cheerful colleagues"),
            ["PRP", "RB", "VBD", "NNP", "IN", "CD", "IN", "CD", "JJ", "NNS"]
        );
        assert_eq!(tags("zorblax"), ["NN"]);
        assert_eq!(tags("the tallest tree"), ["DT", "JJS", "NN"]);
    }

    #[test]
    fn modal_context_gives_base_form() {
        assert_eq!(tags("you can go"), ["PRP", "MD", "VB"]);
        assert_eq!(tags("I want to help"), ["PRP", "VBP", "TO", "VB"]);
    }

    #[test]
    fn every_tag_is_in_inventory() {
        let t = Tagger::default();
        let s = t.tag(&tokenize("Oh , \" ( weird ) ... -- $ 5 # x @ ; ok ? sure-footed"));
        assert!(s.tags().all(tagset::is_valid_tag));
    }

    #[test]
    fn builtin_lexicon_loads() {
        assert!(Tagger::default().lexicon_len() > 500);
    }

    #[test]
    fn bad_lexicon_line() {
        let err = Tagger::from_tsv("a\tDT\nb NN\n", Path::new("lex")).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }

    #[test]
    fn passthrough() {
        let t = Tagger::default();
        let pre = TaggedSentence::from_slashed("We/PRP had/VBD enjoy/VB time/NN ./.").unwrap();
        assert_eq!(tag_or_passthrough(&t, TagInput::Tagged(pre.clone())), pre);
        let toks = tokenize("We had fun");
        assert_eq!(
            tag_or_passthrough(&t, TagInput::Tokens(toks.clone())),
            t.tag(&toks)
        );
    }
}
