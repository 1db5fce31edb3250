//! Labeled tweet datasets.
//!
//! Datasets are stored as JSON lines, one `{"id", "text", "label"?}` object
//! per line. Labels are validated against a [`LabelDomain`]; unlabeled tweets
//! are accepted at load time so the same reader serves inference inputs.

mod synth;

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util;

pub use synth::{synth_corpus, REQUEST_TEMPLATES};

pub const NOT_RWEET: &str = "not_rweet";
pub const RWEET: &str = "rweet";

/// A tweet as ingested: original text plus an optional gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl RawTweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<&str>) -> Self {
        RawTweet {
            id: id.into(),
            text: text.into(),
            label: label.map(str::to_owned),
        }
    }
}

/// An ordered set of class labels. The label's position is its class index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelDomain {
    name: String,
    labels: Vec<String>,
}

impl LabelDomain {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::invalid(format!(
                "label domain {name} needs at least two labels"
            )));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.is_empty() || !seen.insert(label.as_str()) {
                return Err(Error::invalid(format!(
                    "label domain {name} has empty or duplicate label {label:?}"
                )));
            }
        }
        Ok(LabelDomain { name, labels })
    }

    /// `not_rweet` (index 0) and `rweet` (index 1).
    pub fn binary() -> Self {
        LabelDomain {
            name: "binary".into(),
            labels: vec![NOT_RWEET.into(), RWEET.into()],
        }
    }

    /// The six request types.
    pub fn categorical() -> Self {
        LabelDomain {
            name: "categorical".into(),
            labels: ["money", "volunteer", "cloth", "shelter", "medical", "food"]
                .into_iter()
                .map(String::from)
                .collect(),
        }
    }

    /// Looks up one of the two built-in domains by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "binary" => Ok(Self::binary()),
            "categorical" => Ok(Self::categorical()),
            other => Err(Error::invalid(format!(
                "unknown label domain {other:?} (expected binary or categorical)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    /// Maps a label to its index, reporting labels outside the domain.
    pub fn encode(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownLabel {
            label: label.to_owned(),
            domain: self.name.clone(),
        })
    }
}

impl fmt::Display for LabelDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.name, self.labels.join(","))
    }
}

/// An immutable, validated list of tweets in load order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    domain: LabelDomain,
    tweets: Vec<RawTweet>,
}

impl Dataset {
    pub fn new(domain: LabelDomain, tweets: Vec<RawTweet>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(tweets.len());
        for tweet in &tweets {
            validate_id(&tweet.id)?;
            if !ids.insert(tweet.id.as_str()) {
                return Err(Error::DuplicateId(tweet.id.clone()));
            }
            if let Some(label) = &tweet.label {
                domain.encode(label)?;
            }
        }
        Ok(Dataset { domain, tweets })
    }

    pub fn domain(&self) -> &LabelDomain {
        &self.domain
    }

    pub fn tweets(&self) -> &[RawTweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&RawTweet> {
        self.tweets.iter().find(|t| t.id == id)
    }

    /// Class indices for every tweet. Training needs a fully labeled dataset.
    pub fn label_indices(&self) -> Result<Vec<usize>> {
        self.tweets
            .iter()
            .map(|t| match &t.label {
                Some(label) => self.domain.encode(label),
                None => Err(Error::invalid(format!("tweet {:?} has no label", t.id))),
            })
            .collect()
    }

    /// Parses a JSONL stream. Blank lines are skipped.
    pub fn from_reader<R: BufRead>(reader: R, domain: LabelDomain) -> Result<Self> {
        let mut tweets = Vec::new();
        let mut ids = HashSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let tweet: RawTweet = serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            validate_id(&tweet.id).map_err(|e| Error::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            if let Some(label) = &tweet.label {
                domain.encode(label)?;
            }
            if !ids.insert(tweet.id.clone()) {
                return Err(Error::DuplicateId(tweet.id));
            }
            tweets.push(tweet);
        }
        Ok(Dataset { domain, tweets })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for tweet in &self.tweets {
            out.push_str(&serde_json::to_string(tweet).expect("tweet serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        util::write_atomic(path, self.to_jsonl().as_bytes())
    }

    /// Digest of the serialized records and the domain; used as a cache key
    /// component for everything derived from this dataset.
    pub fn content_digest(&self) -> String {
        util::digest_parts([self.domain.to_string(), self.to_jsonl()])
    }
}

fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::invalid("tweet id is empty"));
    }
    // ids are written one per line in row-id files
    if id.chars().any(|c| c == '\n' || c == '\r') {
        return Err(Error::invalid(format!(
            "tweet id {id:?} contains a line break"
        )));
    }
    Ok(())
}

pub fn load_dataset(path: &Path, domain: LabelDomain) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_reader(std::io::BufReader::new(file), domain)
}

/// Per-label counts and fractions over the labeled tweets of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    pub entries: Vec<ClassShare>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassShare {
    pub label: String,
    pub count: usize,
    pub fraction: f64,
}

impl ClassDistribution {
    pub fn count(&self, label: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.count)
    }

    pub fn fraction(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.fraction)
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Counts labels in domain order. Labels with no tweets are omitted, so an
/// empty or unlabeled dataset yields an empty distribution.
pub fn dataset_stats(d: &Dataset) -> ClassDistribution {
    let mut counts = vec![0usize; d.domain.len()];
    for tweet in &d.tweets {
        if let Some(i) = tweet.label.as_deref().and_then(|l| d.domain.index_of(l)) {
            counts[i] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    let entries = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &count)| ClassShare {
            label: d.domain.label(i).to_owned(),
            count,
            fraction: count as f64 / total as f64,
        })
        .collect();
    ClassDistribution { entries }
}
