//! Sequential request patterns.
//!
//! Eighteen ordered token patterns, written as regular expressions, that
//! characterize request tweets. A tweet matching any pattern is classified as
//! a rweet; the per-pattern match bits also serve as binary features.
//!
//! Patterns are evaluated case-insensitively against the *original* tweet
//! text, not the cleaned tokens: cleaning removes the pronouns, modal verbs
//! and question marks the patterns are built from.

use std::sync::LazyLock;

use regex::{Regex, RegexBuilder};

use crate::corpus::{Dataset, NOT_RWEET, RWEET};
use crate::error::{Error, Result};

pub const PATTERN_COUNT: usize = 18;

/// Pattern sources in id order (id = index + 1), reproduced verbatim,
/// including their stray spaces inside alternations.
pub const PATTERN_SOURCES: [&str; PATTERN_COUNT] = [
    r"\b(I|we)\b.*\b(am|are|will be)\b.*\b(bringing|giving|helping|raising|donating|  auctioning)\b",
    r"\b(I\'m)\b.*\b(bringing|giving|helping|raising|donating| auctioning)\b",
    r"\b(we\'re)\b.*\b(bringing|giving|helping|raising|donating |auctioning)\b",
    r"\b(I|we)\b.*\b(will|would like to)\b.*\b(bring|give|help|raise|donate|auction)\b",
    r"\b(I|we)\b.*\b(will|would like to)\b.*\b (work|volunteer|assist)\b",
    r"\b(we\'ll)\b.*\b(bring|give|help|raise|donate|auction)\b",
    r"\b(I|we)\b.*\b(ready|prepared)\b.*\b(bring|give|help|raise|donate|auction)\b",
    r"\b(where)\b.*\b(can I|can we)\b.*\b(bring|give|help| raise|donate)\b",
    r"\b(where)\b.*\b(can I|can we)\b.*\b(work|volunteer |assist)\b",
    r"\b(I|we)\b.*\b(like|want)\b.*\bto\b.*\b(bring|give|help|raise|donate)\b",
    r"\b(I|we)\b.*\b(like|want)\b.*\bto\b.*\b(work|volunteer|assist)\b",
    r"\b(will be)\b.*\b(brought|given|raised|donated| auctioned)\b",
    r"\b\w*\s*\b\?",
    r"\b(you|u).*(can|could|should|want to)\b",
    r"\b(can|could|should).*(you|u)\b",
    r"\b(like|want)\b.*\bto\b.*\b(bring|give|help|raise|donate)\b",
    r"\b(how)\b.*\b(can I|can we)\b.*\b(bring|give|help|raise|donate)\b",
    r"\b(how)\b.*\b(can I|can we)\b.*\b(work|volunteer| assist)\b",
];

#[derive(Debug, Clone)]
pub struct RulePattern {
    pub id: usize,
    pub source: &'static str,
    regex: Regex,
}

impl RulePattern {
    pub fn is_match(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

/// Match bits for the eighteen patterns; bit `id - 1` belongs to pattern `id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RuleMatchVector(u32);

impl RuleMatchVector {
    pub fn from_bits(bits: [bool; PATTERN_COUNT]) -> Self {
        let mut v = 0u32;
        for (i, b) in bits.iter().enumerate() {
            if *b {
                v |= 1 << i;
            }
        }
        RuleMatchVector(v)
    }

    /// Whether pattern `id` (1-based) matched.
    pub fn is_set(&self, id: usize) -> bool {
        assert!(
            (1..=PATTERN_COUNT).contains(&id),
            "pattern id {id} out of range"
        );
        self.0 & (1 << (id - 1)) != 0
    }

    pub fn bits(&self) -> [bool; PATTERN_COUNT] {
        std::array::from_fn(|i| self.0 & (1 << i) != 0)
    }

    pub fn count(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn any(&self) -> bool {
        self.0 != 0
    }

    /// Ids of the patterns that matched, ascending.
    pub fn ids(&self) -> Vec<usize> {
        (1..=PATTERN_COUNT).filter(|&id| self.is_set(id)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleLabel {
    NotRweet,
    Rweet,
}

impl RuleLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleLabel::NotRweet => NOT_RWEET,
            RuleLabel::Rweet => RWEET,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuleSet {
    patterns: Vec<RulePattern>,
}

static STANDARD: LazyLock<RuleSet> =
    LazyLock::new(|| RuleSet::compile().expect("bundled rule patterns compile"));

impl RuleSet {
    /// Compiles the eighteen patterns.
    pub fn compile() -> Result<Self> {
        let patterns = PATTERN_SOURCES
            .iter()
            .enumerate()
            .map(|(i, source)| {
                let regex = RegexBuilder::new(source)
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| Error::Pattern {
                        id: i + 1,
                        message: e.to_string(),
                    })?;
                Ok(RulePattern {
                    id: i + 1,
                    source,
                    regex,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RuleSet { patterns })
    }

    /// Shared compiled instance.
    pub fn standard() -> &'static RuleSet {
        &STANDARD
    }

    pub fn patterns(&self) -> &[RulePattern] {
        &self.patterns
    }

    pub fn match_tweet(&self, raw_text: &str) -> RuleMatchVector {
        let mut bits = [false; PATTERN_COUNT];
        for p in &self.patterns {
            bits[p.id - 1] = p.is_match(raw_text);
        }
        RuleMatchVector::from_bits(bits)
    }

    pub fn classify(&self, raw_text: &str) -> RuleLabel {
        if self.patterns.iter().any(|p| p.is_match(raw_text)) {
            RuleLabel::Rweet
        } else {
            RuleLabel::NotRweet
        }
    }
}

pub fn compile_patterns() -> Result<Vec<RulePattern>> {
    RuleSet::compile().map(|set| set.patterns)
}

pub fn match_tweet(raw_text: &str) -> RuleMatchVector {
    RuleSet::standard().match_tweet(raw_text)
}

pub fn rule_classify(raw_text: &str) -> RuleLabel {
    RuleSet::standard().classify(raw_text)
}

/// Row-aligned rule match vectors, one per tweet id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatrix {
    ids: Vec<String>,
    rows: Vec<RuleMatchVector>,
}

impl RuleMatrix {
    pub fn new(ids: Vec<String>, rows: Vec<RuleMatchVector>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::Dimension {
                expected: ids.len(),
                actual: rows.len(),
            });
        }
        Ok(RuleMatrix { ids, rows })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[RuleMatchVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows for `ids`, in that order.
    pub fn select_ids(&self, ids: &[String]) -> Result<RuleMatrix> {
        let index: std::collections::HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let rows = ids
            .iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .map(|&i| self.rows[i])
                    .ok_or_else(|| Error::invalid(format!("no rule features for tweet {id:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RuleMatrix {
            ids: ids.to_vec(),
            rows,
        })
    }

    pub fn digest(&self) -> String {
        let bits: Vec<String> = self.rows.iter().map(|v| v.0.to_string()).collect();
        crate::util::digest_parts([self.ids.join("\n"), bits.join(",")])
    }

    pub fn select(&self, indices: &[usize]) -> RuleMatrix {
        RuleMatrix {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
        }
    }
}

/// Rule features for every tweet of `d`, evaluated on the original text.
pub fn rule_features(d: &Dataset) -> RuleMatrix {
    let set = RuleSet::standard();
    RuleMatrix {
        ids: d.tweets().iter().map(|t| t.id.clone()).collect(),
        rows: d
            .tweets()
            .iter()
            .map(|t| set.match_tweet(&t.text))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelDomain, RawTweet};

    #[test]
    fn all_patterns_compile() {
        let patterns = compile_patterns().unwrap();
        assert_eq!(patterns.len(), 18);
        assert_eq!(patterns[12].source, r"\b\w*\s*\b\?");
        assert!(patterns[0].source.starts_with(r"\b(I|we)\b"));
        let ids: Vec<usize> = patterns.iter().map(|p| p.id).collect();
        assert_eq!(ids, (1..=18).collect::<Vec<_>>());
    }

    #[test]
    fn documented_matches() {
        assert!(match_tweet("Where can I donate clothes for Sandy victims").is_set(8));
        assert!(!match_tweet("good morning everyone").any());
        assert!(match_tweet("need shelter?").is_set(13));
        assert_eq!(match_tweet("need shelter?").ids(), vec![13]);
        assert!(!match_tweet("donate can I where").is_set(8));
    }

    #[test]
    fn classification() {
        assert_eq!(
            rule_classify("Where can I donate clothes"),
            RuleLabel::Rweet
        );
        assert_eq!(rule_classify(""), RuleLabel::NotRweet);
        assert_eq!(
            rule_classify("I will be donating blankets"),
            RuleLabel::Rweet
        );
        assert!(match_tweet("I will be donating blankets").is_set(1));
    }

    #[test]
    fn feature_rows_follow_dataset_order() {
        let d = Dataset::new(
            LabelDomain::binary(),
            vec![
                RawTweet::new("a", "good morning", None),
                RawTweet::new("b", "need shelter?", None),
                RawTweet::new("c", "storm tonight", None),
            ],
        )
        .unwrap();
        let m = rule_features(&d);
        assert_eq!(m.ids(), ["a", "b", "c"]);
        assert!(!m.rows()[0].any());
        assert_eq!(m.rows()[1].ids(), vec![13]);
        assert!(!m.rows()[2].any());
    }
}
