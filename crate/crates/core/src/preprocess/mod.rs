//! Tweet cleaning.
//!
//! A [`PipelineConfig`] lists cleaning operations in execution order. Text
//! operations run on the whole tweet string, token operations on the
//! whitespace-split token list; the pipeline converts between the two as
//! needed, so any order is executable. Duplicate elimination is a
//! corpus-level reduction and always runs last.
//!
//! The default order generalizes tags *before* removing punctuation: the tag
//! patterns rely on `@`, `:` and `//`, which punctuation removal destroys.

mod lemma;
pub mod resources;

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::util;

pub use lemma::lemma;
pub use resources::{is_stopword, STOPWORD_LIST_ID};

pub const NUM: &str = "_NUM_";
pub const RT: &str = "_RT_";
pub const MENT: &str = "_MENT_";
pub const URL: &str = "_URL_";
pub const PLACEHOLDERS: [&str; 4] = [NUM, RT, MENT, URL];

pub fn is_placeholder(token: &str) -> bool {
    PLACEHOLDERS.contains(&token)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    StripNonAscii,
    EnglishFilter,
    Lowercase,
    GeneralizeTags,
    RemovePunctuation,
    Tokenize,
    RemoveStopwords,
    DropIfShort,
    Lemmatize,
    /// Accepted for configuration compatibility; does nothing.
    SpellCorrect,
    Dedupe,
}

impl Operation {
    pub const ALL: [Operation; 11] = [
        Operation::StripNonAscii,
        Operation::EnglishFilter,
        Operation::Lowercase,
        Operation::GeneralizeTags,
        Operation::RemovePunctuation,
        Operation::Tokenize,
        Operation::RemoveStopwords,
        Operation::DropIfShort,
        Operation::Lemmatize,
        Operation::SpellCorrect,
        Operation::Dedupe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::StripNonAscii => "strip_non_ascii",
            Operation::EnglishFilter => "is_english",
            Operation::Lowercase => "lowercase",
            Operation::GeneralizeTags => "generalize_tags",
            Operation::RemovePunctuation => "remove_punctuation",
            Operation::Tokenize => "tokenize",
            Operation::RemoveStopwords => "remove_stopwords",
            Operation::DropIfShort => "drop_if_short",
            Operation::Lemmatize => "lemmatize",
            Operation::SpellCorrect => "spell_correct",
            Operation::Dedupe => "dedupe",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Operation::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown preprocessing operation {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    operations: Vec<Operation>,
    stopword_list: String,
    english_threshold: f64,
    min_tokens: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            operations: vec![
                Operation::StripNonAscii,
                Operation::EnglishFilter,
                Operation::Lowercase,
                Operation::GeneralizeTags,
                Operation::RemovePunctuation,
                Operation::Tokenize,
                Operation::RemoveStopwords,
                Operation::DropIfShort,
                Operation::Lemmatize,
                Operation::Dedupe,
            ],
            stopword_list: STOPWORD_LIST_ID.to_owned(),
            english_threshold: 0.15,
            min_tokens: 2,
        }
    }
}

impl PipelineConfig {
    pub fn new(
        operations: Vec<Operation>,
        stopword_list: &str,
        english_threshold: f64,
        min_tokens: usize,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for op in &operations {
            if !seen.insert(*op) {
                return Err(Error::invalid(format!("operation {op} listed twice")));
            }
        }
        if let Some(pos) = operations.iter().position(|op| *op == Operation::Dedupe) {
            if pos + 1 != operations.len() {
                return Err(Error::invalid("dedupe must be the last operation"));
            }
        }
        if stopword_list != STOPWORD_LIST_ID {
            return Err(Error::invalid(format!(
                "unknown stopword list {stopword_list:?}"
            )));
        }
        if !(0.0..=1.0).contains(&english_threshold) {
            return Err(Error::invalid(format!(
                "english threshold {english_threshold} outside [0, 1]"
            )));
        }
        Ok(PipelineConfig {
            operations,
            stopword_list: stopword_list.to_owned(),
            english_threshold,
            min_tokens,
        })
    }

    /// The order in which the operations are enumerated in prose: punctuation
    /// removal, stopword removal and short-tweet pruning before tag
    /// generalization. Kept for ablation runs.
    pub fn prose_order() -> Self {
        Self {
            operations: vec![
                Operation::StripNonAscii,
                Operation::EnglishFilter,
                Operation::Lowercase,
                Operation::RemovePunctuation,
                Operation::Tokenize,
                Operation::RemoveStopwords,
                Operation::DropIfShort,
                Operation::GeneralizeTags,
                Operation::Lemmatize,
                Operation::Dedupe,
            ],
            ..Self::default()
        }
    }

    /// Parses a comma-separated list of operation names.
    pub fn with_order(self, order: &str) -> Result<Self> {
        let ops = order
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            ops,
            &self.stopword_list,
            self.english_threshold,
            self.min_tokens,
        )
    }

    pub fn with_english_threshold(self, threshold: f64) -> Result<Self> {
        Self::new(
            self.operations,
            &self.stopword_list,
            threshold,
            self.min_tokens,
        )
    }

    pub fn with_min_tokens(self, min_tokens: usize) -> Result<Self> {
        Self::new(
            self.operations,
            &self.stopword_list,
            self.english_threshold,
            min_tokens,
        )
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn english_threshold(&self) -> f64 {
        self.english_threshold
    }

    pub fn min_tokens(&self) -> usize {
        self.min_tokens
    }

    /// Stable digest over the operation order, parameters and the bundled
    /// word lists.
    pub fn digest(&self) -> String {
        let order: Vec<&str> = self.operations.iter().map(|op| op.name()).collect();
        util::digest_parts([
            order.join(","),
            self.stopword_list.clone(),
            format!("{:?}", self.english_threshold),
            self.min_tokens.to_string(),
            resources::stopwords_digest(),
            resources::lemma_resources_digest(),
        ])
    }
}

// Tag patterns, applied in this order.
static NUM_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:(?:\d+,?)+(?:\.?\d+)?)").unwrap());
static RT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:(RT|rt) @ ?[\w_]+:?)").unwrap());
static MENT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:@ ?[\w_]+)").unwrap());
// The scheme-prefixed form, extended to bare `www.` hosts.
static URL_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?:http[s]? ?: ?//|www\.)(?:[a-z]|[0-9]|[$-_@.&+]|[!*\(\),]|(?:%[0-9a-f][0-9a-f]))+",
    )
    .unwrap()
});

pub fn strip_non_ascii(text: &str) -> String {
    text.chars().filter(char::is_ascii).collect()
}

/// Lowercase words, plus stopword-free words that carry English content
/// (bundled lexicon entries and their inflections) and placeholders.
fn english_evidence(word: &str) -> bool {
    is_stopword(word)
        || is_placeholder(word)
        || resources::LEXICON.contains(word)
        || resources::LEXICON.contains(lemma(word).as_str())
}

/// Stopword-ratio language test. Words are whitespace-separated chunks with
/// surrounding punctuation trimmed that contain at least one letter.
pub fn is_english(text: &str, threshold: f64) -> bool {
    let mut words = 0usize;
    let mut hits = 0usize;
    for chunk in text.split_whitespace() {
        let trimmed =
            chunk.trim_matches(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''));
        if !trimmed.chars().any(|c| c.is_ascii_alphabetic()) {
            continue;
        }
        words += 1;
        let word = if is_placeholder(trimmed) {
            trimmed.to_owned()
        } else {
            trimmed.to_ascii_lowercase()
        };
        if english_evidence(&word) {
            hits += 1;
        }
    }
    if words == 0 {
        return false;
    }
    hits as f64 / words as f64 >= threshold || (words < 3 && hits >= 1)
}

/// ASCII lowercasing that leaves placeholders intact.
pub fn lowercase(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(p) = PLACEHOLDERS.iter().find(|p| rest.starts_with(**p)) {
            out.push_str(p);
            rest = &rest[p.len()..];
        } else {
            let c = rest.chars().next().unwrap();
            out.push(c.to_ascii_lowercase());
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

/// Replaces numbers, retweet markers, mentions and URLs with placeholders,
/// in that order. Hashtags are left alone.
pub fn generalize_tags(text: &str) -> String {
    let text = NUM_RE.replace_all(text, NUM);
    let text = RT_RE.replace_all(&text, RT);
    let text = MENT_RE.replace_all(&text, MENT);
    URL_RE.replace_all(&text, URL).into_owned()
}

fn kept_char(c: char) -> bool {
    matches!(c, 'a'..='z' | '0'..='9' | '_' | '#' | '\'')
}

/// Replaces every run of characters outside `[a-z0-9_#']` with a single
/// space. Placeholders are kept and split off from adjacent characters so
/// that each one stands as its own token.
pub fn remove_punctuation(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(p) = PLACEHOLDERS.iter().find(|p| rest.starts_with(**p)) {
            out.push(' ');
            out.push_str(p);
            out.push(' ');
            rest = &rest[p.len()..];
        } else {
            let c = rest.chars().next().unwrap();
            out.push(if kept_char(c) { c } else { ' ' });
            rest = &rest[c.len_utf8()..];
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

pub fn remove_stopwords(tokens: Vec<String>) -> Vec<String> {
    tokens.into_iter().filter(|t| !is_stopword(t)).collect()
}

/// `None` when fewer than `min_tokens` tokens remain (the default of two
/// prunes empty and single-word tweets).
pub fn drop_if_short(tokens: Vec<String>, min_tokens: usize) -> Option<Vec<String>> {
    if tokens.len() < min_tokens.max(1) {
        None
    } else {
        Some(tokens)
    }
}

pub fn lemmatize(tokens: Vec<String>) -> Vec<String> {
    tokens.iter().map(|t| lemma(t)).collect()
}

/// Keeps the first tweet for every distinct space-joined token string.
pub fn dedupe(corpus: Vec<CleanTweet>) -> Vec<CleanTweet> {
    let mut seen = HashSet::new();
    corpus
        .into_iter()
        .filter(|t| seen.insert(t.tokens.join(" ")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanTweet {
    pub id: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl CleanTweet {
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Output of the cleaning pipeline, keyed by the digest of the pipeline
/// configuration and the source dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanCorpus {
    digest: String,
    tweets: Vec<CleanTweet>,
}

impl CleanCorpus {
    pub fn new(digest: impl Into<String>, tweets: Vec<CleanTweet>) -> Self {
        CleanCorpus {
            digest: digest.into(),
            tweets,
        }
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn tweets(&self) -> &[CleanTweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.tweets.iter().map(|t| t.id.clone()).collect()
    }

    /// Rows at `indices`, in the given order. The digest records the
    /// selection so that features built from subsets never collide.
    pub fn select(&self, indices: &[usize]) -> CleanCorpus {
        let idx: Vec<String> = indices.iter().map(usize::to_string).collect();
        CleanCorpus {
            digest: util::digest_parts([self.digest.clone(), idx.join(",")]),
            tweets: indices.iter().map(|&i| self.tweets[i].clone()).collect(),
        }
    }

    /// Digest over the cleaned content itself.
    pub fn content_digest(&self) -> String {
        util::digest_parts([self.digest.clone(), self.to_jsonl()])
    }

    fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.tweets {
            out.push_str(&serde_json::to_string(t).expect("clean tweet serializes"));
            out.push('\n');
        }
        out
    }

    /// `CLEAN v1 <digest> <count>` followed by one JSON object per tweet.
    pub fn to_text(&self) -> String {
        format!(
            "CLEAN v1 {} {}\n{}",
            self.digest,
            self.tweets.len(),
            self.to_jsonl()
        )
    }

    pub fn from_reader<R: BufRead>(reader: R, expected_digest: &str) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::Format(e.to_string()))?,
            None => return Err(Error::Format("empty clean-corpus file".into())),
        };
        let fields: Vec<&str> = header.split(' ').collect();
        let (digest, count) = match fields.as_slice() {
            ["CLEAN", "v1", digest, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::Format(format!("bad tweet count in header {header:?}")))?;
                (digest.to_string(), count)
            }
            _ => return Err(Error::Format(format!("bad clean-corpus header {header:?}"))),
        };
        if digest != expected_digest {
            return Err(Error::StaleCache {
                expected: expected_digest.to_owned(),
                found: digest,
            });
        }
        let mut tweets = Vec::with_capacity(count);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            let tweet: CleanTweet = serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: i + 2,
                message: e.to_string(),
            })?;
            tweets.push(tweet);
        }
        if tweets.len() != count {
            return Err(Error::Format(format!(
                "header announces {count} tweets, file has {}",
                tweets.len()
            )));
        }
        Ok(CleanCorpus { digest, tweets })
    }
}

pub fn save_clean(path: &Path, corpus: &CleanCorpus) -> Result<()> {
    util::write_atomic(path, corpus.to_text().as_bytes())
}

pub fn load_clean(path: &Path, expected_digest: &str) -> Result<CleanCorpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    CleanCorpus::from_reader(std::io::BufReader::new(file), expected_digest)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub operation: String,
    /// Tweets removed by this stage.
    pub removed: usize,
    /// Change in the total token count of the surviving tweets.
    pub token_delta: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreprocessReport {
    pub input: usize,
    pub output: usize,
    pub stages: Vec<StageReport>,
    pub duplicates_removed: usize,
    pub warnings: Vec<String>,
}

impl PreprocessReport {
    pub fn total_removed(&self) -> usize {
        self.stages.iter().map(|s| s.removed).sum()
    }

    pub fn removed_by(&self, op: Operation) -> usize {
        self.stages
            .iter()
            .find(|s| s.operation == op.name())
            .map_or(0, |s| s.removed)
    }
}

impl fmt::Display for PreprocessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20} {:>8} {:>12}", "stage", "removed", "token_delta")?;
        for s in &self.stages {
            writeln!(
                f,
                "{:<20} {:>8} {:>12}",
                s.operation, s.removed, s.token_delta
            )?;
        }
        write!(
            f,
            "input {} -> output {} ({} duplicates)",
            self.input, self.output, self.duplicates_removed
        )
    }
}

enum State {
    Text(String),
    Tokens(Vec<String>),
}

impl State {
    fn token_count(&self) -> usize {
        match self {
            State::Text(t) => t.split_whitespace().count(),
            State::Tokens(t) => t.len(),
        }
    }

    fn into_text(self) -> String {
        match self {
            State::Text(t) => t,
            State::Tokens(t) => t.join(" "),
        }
    }

    fn into_tokens(self) -> Vec<String> {
        match self {
            State::Text(t) => tokenize(&t),
            State::Tokens(t) => t,
        }
    }
}

fn apply(op: Operation, state: State, cfg: &PipelineConfig) -> Option<State> {
    Some(match op {
        Operation::StripNonAscii => State::Text(strip_non_ascii(&state.into_text())),
        Operation::EnglishFilter => {
            let text = state.into_text();
            if !is_english(&text, cfg.english_threshold) {
                return None;
            }
            State::Text(text)
        }
        Operation::Lowercase => State::Text(lowercase(&state.into_text())),
        Operation::GeneralizeTags => State::Text(generalize_tags(&state.into_text())),
        Operation::RemovePunctuation => State::Text(remove_punctuation(&state.into_text())),
        Operation::Tokenize => State::Tokens(state.into_tokens()),
        Operation::RemoveStopwords => State::Tokens(remove_stopwords(state.into_tokens())),
        Operation::DropIfShort => {
            State::Tokens(drop_if_short(state.into_tokens(), cfg.min_tokens)?)
        }
        Operation::Lemmatize => State::Tokens(lemmatize(state.into_tokens())),
        Operation::SpellCorrect | Operation::Dedupe => state,
    })
}

/// Digest identifying the cleaned form of `d` under `cfg`; names the clean
/// corpus before it is computed.
pub fn clean_digest(d: &Dataset, cfg: &PipelineConfig) -> String {
    util::digest_parts([cfg.digest(), d.content_digest()])
}

/// Cleans every tweet of `d` and eliminates duplicates. Every removed tweet
/// is attributed to exactly one stage of the report.
pub fn run_pipeline(d: &Dataset, cfg: &PipelineConfig) -> (CleanCorpus, PreprocessReport) {
    let per_tweet: Vec<Operation> = cfg
        .operations
        .iter()
        .copied()
        .filter(|op| *op != Operation::Dedupe)
        .collect();
    let mut stages: Vec<StageReport> = per_tweet
        .iter()
        .map(|op| StageReport {
            operation: op.name().to_owned(),
            removed: 0,
            token_delta: 0,
        })
        .collect();
    let mut warnings = Vec::new();
    if cfg.operations.contains(&Operation::SpellCorrect) {
        warnings.push("spell_correct is not supported and was skipped".to_owned());
    }

    let mut empty_removed = 0;
    let mut cleaned = Vec::with_capacity(d.len());
    'tweets: for tweet in d.tweets() {
        let mut state = State::Text(tweet.text.clone());
        for (stage, &op) in stages.iter_mut().zip(&per_tweet) {
            let before = state.token_count() as i64;
            match apply(op, state, cfg) {
                Some(next) => {
                    stage.token_delta += next.token_count() as i64 - before;
                    state = next;
                }
                None => {
                    stage.removed += 1;
                    continue 'tweets;
                }
            }
        }
        let tokens = state.into_tokens();
        if tokens.is_empty() {
            empty_removed += 1;
            continue;
        }
        cleaned.push(CleanTweet {
            id: tweet.id.clone(),
            tokens,
            label: tweet.label.clone(),
        });
    }
    if empty_removed > 0 {
        stages.push(StageReport {
            operation: "empty".to_owned(),
            removed: empty_removed,
            token_delta: 0,
        });
    }

    let mut duplicates_removed = 0;
    if cfg.operations.contains(&Operation::Dedupe) {
        let before = cleaned.len();
        let tokens_before: usize = cleaned.iter().map(|t| t.tokens.len()).sum();
        cleaned = dedupe(cleaned);
        let tokens_after: usize = cleaned.iter().map(|t| t.tokens.len()).sum();
        duplicates_removed = before - cleaned.len();
        stages.push(StageReport {
            operation: Operation::Dedupe.name().to_owned(),
            removed: duplicates_removed,
            token_delta: tokens_after as i64 - tokens_before as i64,
        });
    }

    let digest = clean_digest(d, cfg);
    let report = PreprocessReport {
        input: d.len(),
        output: cleaned.len(),
        stages,
        duplicates_removed,
        warnings,
    };
    (CleanCorpus::new(digest, cleaned), report)
}
