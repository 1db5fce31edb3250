//! Bag-of-n-grams features.
//!
//! A [`Featurizer`] is fitted on a cleaned corpus (vocabulary and document
//! frequencies) and turns any cleaned corpus into a [`FeatureMatrix`]: tf or
//! tf-idf weights over 1- to 3-grams, optionally L2-normalized, optionally
//! followed by the eighteen binary rule features.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::preprocess::CleanCorpus;
use crate::rules::{RuleMatrix, PATTERN_COUNT};
use crate::sparse::{SparseMatrix, SparseRow};
use crate::util;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NgramRange {
    lo: usize,
    hi: usize,
}

impl NgramRange {
    pub const MAX_N: usize = 3;

    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo < 1 || lo > hi || hi > Self::MAX_N {
            return Err(Error::invalid(format!("invalid n-gram range ({lo}, {hi})")));
        }
        Ok(NgramRange { lo, hi })
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    /// The six ranges crossed into the feature combinations, in table order.
    pub fn all() -> [NgramRange; 6] {
        [(1, 1), (2, 2), (3, 3), (1, 2), (2, 3), (1, 3)].map(|(lo, hi)| NgramRange { lo, hi })
    }
}

impl fmt::Display for NgramRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl std::str::FromStr for NgramRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(['-', ','])
            .ok_or_else(|| Error::invalid(format!("n-gram range {s:?} is not lo-hi")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("n-gram range {s:?} is not lo-hi")))
        };
        NgramRange::new(parse(lo)?, parse(hi)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vectorizer {
    Tf,
    TfIdf,
}

impl Vectorizer {
    pub fn name(self) -> &'static str {
        match self {
            Vectorizer::Tf => "tf",
            Vectorizer::TfIdf => "tf-idf",
        }
    }
}

impl std::str::FromStr for Vectorizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tf" => Ok(Vectorizer::Tf),
            "tf-idf" | "tfidf" => Ok(Vectorizer::TfIdf),
            other => Err(Error::invalid(format!("unknown vectorizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub vectorizer: Vectorizer,
    pub ngrams: NgramRange,
    pub append_rules: bool,
    /// Minimum number of documents a term must occur in.
    pub min_df: usize,
    /// Maximum fraction of documents a term may occur in.
    pub max_df: f64,
    pub l2_normalize: bool,
}

impl FeatureConfig {
    pub const COMBOS: usize = 24;

    pub fn new(vectorizer: Vectorizer, ngrams: NgramRange, append_rules: bool) -> Self {
        FeatureConfig {
            vectorizer,
            ngrams,
            append_rules,
            min_df: 1,
            max_df: 1.0,
            l2_normalize: true,
        }
    }

    /// Feature combination `n` (1-based): tf rows 1-12 then tf-idf rows
    /// 13-24; within each, rule features off for the first six ranges and on
    /// for the next six.
    pub fn combo(n: usize) -> Result<Self> {
        if !(1..=Self::COMBOS).contains(&n) {
            return Err(Error::invalid(format!(
                "feature combination {n} outside 1..=24"
            )));
        }
        let i = n - 1;
        let vectorizer = if i < 12 {
            Vectorizer::Tf
        } else {
            Vectorizer::TfIdf
        };
        let append_rules = (i % 12) >= 6;
        let ngrams = NgramRange::all()[i % 6];
        Ok(FeatureConfig::new(vectorizer, ngrams, append_rules))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_df > 0.0 && self.max_df <= 1.0) {
            return Err(Error::invalid(format!(
                "max_df {} outside (0, 1]",
                self.max_df
            )));
        }
        Ok(())
    }

    /// Space-separated `key=value` form; parsed back by [`FeatureConfig::from_kv`].
    pub fn to_kv(&self) -> String {
        format!(
            "vectorizer={} ngrams={} rules={} min_df={} max_df={:?} l2={}",
            self.vectorizer.name(),
            self.ngrams,
            yes_no(self.append_rules),
            self.min_df,
            self.max_df,
            yes_no(self.l2_normalize)
        )
    }

    pub fn from_kv(s: &str) -> Result<Self> {
        let mut cfg = FeatureConfig::new(Vectorizer::Tf, NgramRange { lo: 1, hi: 1 }, false);
        for pair in s.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("feature config entry {pair:?}")))?;
            match k {
                "vectorizer" => cfg.vectorizer = v.parse()?,
                "ngrams" => cfg.ngrams = v.parse()?,
                "rules" => cfg.append_rules = parse_yes_no(v)?,
                "min_df" => {
                    cfg.min_df = v
                        .parse()
                        .map_err(|_| Error::Format(format!("min_df {v:?}")))?
                }
                "max_df" => {
                    cfg.max_df = v
                        .parse()
                        .map_err(|_| Error::Format(format!("max_df {v:?}")))?
                }
                "l2" => cfg.l2_normalize = parse_yes_no(v)?,
                other => {
                    return Err(Error::Format(format!(
                        "unknown feature config key {other:?}"
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn digest(&self) -> String {
        util::digest_parts(["features", &self.to_kv()])
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn parse_yes_no(v: &str) -> Result<bool> {
    match v {
        "yes" | "true" => Ok(true),
        "no" | "false" => Ok(false),
        other => Err(Error::Format(format!("expected yes/no, got {other:?}"))),
    }
}

/// All 24 combinations in table order.
pub fn enumerate_combos() -> Vec<FeatureConfig> {
    (1..=FeatureConfig::COMBOS)
        .map(|n| FeatureConfig::combo(n).expect("combo index in range"))
        .collect()
}

/// Space-joined contiguous windows of `n` tokens.
pub fn extract_ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> Vec<String> {
    assert!(n >= 1, "n-gram length must be positive");
    if tokens.len() < n {
        return Vec::new();
    }
    tokens
        .windows(n)
        .map(|w| w.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" "))
        .collect()
}

/// Every n-gram of a document for `n` in the range, shortest first.
pub fn document_terms<S: AsRef<str>>(tokens: &[S], range: NgramRange) -> Vec<String> {
    (range.lo..=range.hi)
        .flat_map(|n| extract_ngrams(tokens, n))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    range: NgramRange,
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    fn from_parts(
        range: NgramRange,
        terms: Vec<String>,
        doc_freq: Vec<usize>,
        n_docs: usize,
    ) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::Format(
                "vocabulary and document frequencies differ in length".into(),
            ));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            let n = t.split(' ').count();
            if n < range.lo || n > range.hi || index.insert(t.clone(), i).is_some() {
                return Err(Error::Format(format!(
                    "vocabulary term {t:?} invalid for range {range}"
                )));
            }
        }
        Ok(Vocabulary {
            range,
            terms,
            index,
            doc_freq,
            n_docs,
        })
    }

    pub fn range(&self) -> NgramRange {
        self.range
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, col: usize) -> usize {
        self.doc_freq[col]
    }

    /// Number of documents the frequencies were counted over.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, col: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.doc_freq[col] as f64)).ln() + 1.0
    }

    fn digest(&self) -> String {
        let dfs: Vec<String> = self.doc_freq.iter().map(usize::to_string).collect();
        util::digest_parts([
            self.range.to_string(),
            self.n_docs.to_string(),
            self.terms.join("\n"),
            dfs.join(","),
        ])
    }
}

/// Collects n-gram terms over `docs`, dropping terms whose document
/// frequency is below `min_df` or above `max_df * N`. Columns are numbered in
/// order of first appearance.
pub fn build_vocabulary<D: AsRef<[String]>>(
    docs: &[D],
    range: NgramRange,
    min_df: usize,
    max_df: f64,
) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::invalid(
            "cannot build a vocabulary from an empty corpus",
        ));
    }
    let mut order: Vec<String> = Vec::new();
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in docs {
        let mut terms = document_terms(doc.as_ref(), range);
        let mut seen = std::collections::HashSet::new();
        terms.retain(|t| seen.insert(t.clone()));
        for t in terms {
            let count = df.entry(t.clone()).or_insert(0);
            if *count == 0 {
                order.push(t);
            }
            *count += 1;
        }
    }
    let n_docs = docs.len();
    let max_count = max_df * n_docs as f64;
    let (terms, doc_freq): (Vec<String>, Vec<usize>) = order
        .into_iter()
        .filter_map(|t| {
            let d = df[&t];
            (d >= min_df && d as f64 <= max_count).then_some((t, d))
        })
        .unzip();
    if terms.is_empty() {
        return Err(Error::invalid(
            "vocabulary is empty after frequency filtering",
        ));
    }
    Vocabulary::from_parts(range, terms, doc_freq, n_docs)
}

fn count_row<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<(usize, f64)> {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for term in document_terms(tokens, vocab.range) {
        if let Some(c) = vocab.column(&term) {
            *counts.entry(c).or_insert(0.0) += 1.0;
        }
    }
    let mut row: Vec<(usize, f64)> = counts.into_iter().collect();
    row.sort_by_key(|&(c, _)| c);
    row
}

/// Raw term counts; terms outside the vocabulary are ignored.
pub fn vectorize_tf<D: AsRef<[String]>>(docs: &[D], vocab: &Vocabulary) -> SparseMatrix {
    let rows = docs.iter().map(|d| count_row(d.as_ref(), vocab)).collect();
    SparseMatrix::from_sorted_rows(vocab.len(), rows)
}

/// Term counts scaled by the vocabulary's smoothed idf.
pub fn vectorize_tfidf<D: AsRef<[String]>>(docs: &[D], vocab: &Vocabulary) -> SparseMatrix {
    vectorize_tf(docs, vocab).map_values(|c, v| v * vocab.idf(c))
}

/// Scales every nonempty row to unit Euclidean norm.
pub fn l2_normalize_rows(m: &SparseMatrix) -> SparseMatrix {
    m.scale_rows(|r| {
        let norm = m.row(r).norm();
        if norm > 0.0 {
            1.0 / norm
        } else {
            1.0
        }
    })
}

/// `dot(a, b) / (|a| |b|)`, or 0 when either row is empty.
pub fn cosine_similarity(a: SparseRow<'_>, b: SparseRow<'_>) -> Result<f64> {
    let dot = a.dot(&b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (na * nb))
}

/// Binary `rows x 18` matrix of rule match bits.
pub fn rule_block(rules: &RuleMatrix) -> SparseMatrix {
    let rows = rules
        .rows()
        .iter()
        .map(|v| v.ids().into_iter().map(|id| (id - 1, 1.0)).collect())
        .collect();
    SparseMatrix::from_sorted_rows(PATTERN_COUNT, rows)
}

/// Which flavour of matrix a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixView {
    /// tf or tf-idf per the configuration, normalized if configured.
    Weighted,
    /// Raw term counts, never normalized.
    Counts,
}

impl MatrixView {
    fn name(self) -> &'static str {
        match self {
            MatrixView::Weighted => "weighted",
            MatrixView::Counts => "counts",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub matrix: SparseMatrix,
    pub vocab: Vocabulary,
    pub config: FeatureConfig,
    pub row_ids: Vec<String>,
    /// Cache key: digest of the featurizer, the source corpus and the view.
    pub key: String,
    pub rules_appended: bool,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Keeps the rows at `indices` (ascending), preserving id alignment.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let picked: Vec<String> = indices.iter().map(usize::to_string).collect();
        FeatureMatrix {
            matrix: self.matrix.select_rows(indices),
            vocab: self.vocab.clone(),
            config: self.config,
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
            key: util::digest_parts([self.key.clone(), picked.join(",")]),
            rules_appended: self.rules_appended,
        }
    }
}

/// Appends the binary rule block to the right of the n-gram block. Rows must
/// correspond to the same tweets in the same order.
pub fn append_rule_features(m: FeatureMatrix, rules: &RuleMatrix) -> Result<FeatureMatrix> {
    if m.rules_appended {
        return Err(Error::invalid("rule features already appended"));
    }
    if rules.len() != m.rows() {
        return Err(Error::Dimension {
            expected: m.rows(),
            actual: rules.len(),
        });
    }
    if rules.ids() != m.row_ids.as_slice() {
        return Err(Error::invalid(
            "rule feature rows are not aligned with the feature matrix",
        ));
    }
    let matrix = m.matrix.hstack(&rule_block(rules))?;
    let mut config = m.config;
    config.append_rules = true;
    Ok(FeatureMatrix {
        matrix,
        vocab: m.vocab,
        config,
        row_ids: m.row_ids,
        key: rules_key(&m.key, rules),
        rules_appended: true,
    })
}

fn rules_key(base: &str, rules: &RuleMatrix) -> String {
    util::digest_parts([base, "rules", &rules.digest()])
}

/// A vocabulary fitted on a training corpus, together with the feature
/// configuration it applies.
#[derive(Debug, Clone, PartialEq)]
pub struct Featurizer {
    config: FeatureConfig,
    vocab: Vocabulary,
}

impl Featurizer {
    pub fn fit(corpus: &CleanCorpus, config: FeatureConfig) -> Result<Self> {
        config.validate()?;
        let docs: Vec<&[String]> = corpus
            .tweets()
            .iter()
            .map(|t| t.tokens.as_slice())
            .collect();
        let vocab = build_vocabulary(&docs, config.ngrams, config.min_df, config.max_df)?;
        Ok(Featurizer { config, vocab })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Number of columns produced by [`Featurizer::transform`].
    pub fn cols(&self) -> usize {
        self.vocab.len()
            + if self.config.append_rules {
                PATTERN_COUNT
            } else {
                0
            }
    }

    pub fn digest(&self) -> String {
        util::digest_parts([self.config.digest(), self.vocab.digest()])
    }

    /// Featurizes `corpus`. Rule features, when configured, must be given
    /// for exactly the corpus' tweets in corpus order.
    pub fn transform(
        &self,
        corpus: &CleanCorpus,
        rules: Option<&RuleMatrix>,
        view: MatrixView,
    ) -> Result<FeatureMatrix> {
        let docs: Vec<&[String]> = corpus
            .tweets()
            .iter()
            .map(|t| t.tokens.as_slice())
            .collect();
        let matrix = match (view, self.config.vectorizer) {
            (MatrixView::Counts, _) | (MatrixView::Weighted, Vectorizer::Tf) => {
                vectorize_tf(&docs, &self.vocab)
            }
            (MatrixView::Weighted, Vectorizer::TfIdf) => vectorize_tfidf(&docs, &self.vocab),
        };
        let matrix = if view == MatrixView::Weighted && self.config.l2_normalize {
            l2_normalize_rows(&matrix)
        } else {
            matrix
        };
        let mut config = self.config;
        config.append_rules = false;
        let fm = FeatureMatrix {
            matrix,
            vocab: self.vocab.clone(),
            config,
            row_ids: corpus.ids(),
            key: self.base_key(corpus, view),
            rules_appended: false,
        };
        if self.config.append_rules {
            let rules = rules.ok_or_else(|| {
                Error::invalid("configuration appends rule features but none were given")
            })?;
            append_rule_features(fm, rules)
        } else {
            Ok(fm)
        }
    }

    fn base_key(&self, corpus: &CleanCorpus, view: MatrixView) -> String {
        util::digest_parts([
            self.digest(),
            corpus.content_digest(),
            view.name().to_owned(),
        ])
    }

    /// The key [`Featurizer::transform`] would give its result, computed
    /// without featurizing.
    pub fn matrix_key(
        &self,
        corpus: &CleanCorpus,
        rules: Option<&RuleMatrix>,
        view: MatrixView,
    ) -> String {
        let base = self.base_key(corpus, view);
        match (self.config.append_rules, rules) {
            (true, Some(r)) => rules_key(&base, r),
            (true, None) => util::digest_parts([base.as_str(), "rules", "none"]),
            (false, _) => base,
        }
    }

    /// `FEATURIZER v1 <digest> <n_docs> <terms>`, the configuration line, then
    /// one `term<TAB>df` line per column.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "FEATURIZER v1 {} {} {}\n{}\n",
            self.digest(),
            self.vocab.n_docs,
            self.vocab.len(),
            self.config.to_kv()
        );
        for (t, df) in self.vocab.terms.iter().zip(&self.vocab.doc_freq) {
            out.push_str(&format!("{t}\t{df}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let fields: Vec<&str> = header.split(' ').collect();
        let (digest, n_docs, n_terms) = match fields.as_slice() {
            ["FEATURIZER", "v1", digest, n_docs, n_terms] => (
                digest.to_string(),
                parse_num(n_docs, header)?,
                parse_num(n_terms, header)?,
            ),
            _ => return Err(Error::Format(format!("bad featurizer header {header:?}"))),
        };
        let config = FeatureConfig::from_kv(lines.next().unwrap_or_default())?;
        let mut terms = Vec::with_capacity(n_terms);
        let mut dfs = Vec::with_capacity(n_terms);
        for line in lines {
            let (t, df) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("bad vocabulary line {line:?}")))?;
            terms.push(t.to_owned());
            dfs.push(parse_num(df, line)?);
        }
        if terms.len() != n_terms {
            return Err(Error::Format(format!(
                "expected {n_terms} terms, found {}",
                terms.len()
            )));
        }
        let vocab = Vocabulary::from_parts(config.ngrams, terms, dfs, n_docs)?;
        let f = Featurizer { config, vocab };
        if f.digest() != digest {
            return Err(Error::StaleCache {
                expected: digest,
                found: f.digest(),
            });
        }
        Ok(f)
    }
}

/// Fits a featurizer on `corpus` and featurizes that same corpus. The
/// vocabulary sees every row, so the result suits cache precomputation but
/// not held-out evaluation.
pub fn build_features(
    corpus: &CleanCorpus,
    rules: Option<&RuleMatrix>,
    config: FeatureConfig,
) -> Result<FeatureMatrix> {
    Featurizer::fit(corpus, config)?.transform(corpus, rules, MatrixView::Weighted)
}

fn parse_num(v: &str, context: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Format(format!("bad number {v:?} in {context:?}")))
}

/// Companion file paths for a matrix stored under `stem`.
pub struct MatrixPaths {
    pub matrix: PathBuf,
    pub vocab: PathBuf,
    pub rows: PathBuf,
    pub doc_freq: PathBuf,
}

impl MatrixPaths {
    pub fn new(stem: &Path) -> Self {
        let with = |ext: &str| {
            let mut s = stem.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        MatrixPaths {
            matrix: with(".spmat"),
            vocab: with(".vocab"),
            rows: with(".rows"),
            doc_freq: with(".df"),
        }
    }

    pub fn exist(&self) -> bool {
        [&self.matrix, &self.vocab, &self.rows, &self.doc_freq]
            .iter()
            .all(|p| p.exists())
    }
}

/// Writes `<stem>.spmat` (`SPMAT v1 <rows> <cols> <nnz> <key>` then one
/// `row col value` line per nonzero, row-major), `<stem>.vocab`
/// (`index<TAB>term`), `<stem>.rows` (one id per line) and `<stem>.df`
/// (document frequencies).
pub fn save_matrix(stem: &Path, fm: &FeatureMatrix) -> Result<()> {
    let paths = MatrixPaths::new(stem);
    let mut spmat = format!(
        "SPMAT v1 {} {} {} {}\n",
        fm.rows(),
        fm.cols(),
        fm.matrix.nnz(),
        fm.key
    );
    for (r, c, v) in fm.matrix.triplets() {
        spmat.push_str(&format!("{r} {c} {v:?}\n"));
    }
    let mut vocab = String::new();
    for (i, t) in fm.vocab.terms.iter().enumerate() {
        vocab.push_str(&format!("{i}\t{t}\n"));
    }
    let mut rows = String::new();
    for id in &fm.row_ids {
        rows.push_str(id);
        rows.push('\n');
    }
    let mut df = format!("DF v1 {} {}\n", fm.vocab.n_docs, fm.vocab.range);
    for d in &fm.vocab.doc_freq {
        df.push_str(&format!("{d}\n"));
    }
    // the matrix file goes last: its presence marks a complete entry
    util::write_atomic(&paths.vocab, vocab.as_bytes())?;
    util::write_atomic(&paths.rows, rows.as_bytes())?;
    util::write_atomic(&paths.doc_freq, df.as_bytes())?;
    util::write_atomic(&paths.matrix, spmat.as_bytes())
}

/// Reads the header of `<stem>.spmat` and returns its key.
pub fn peek_matrix_key(stem: &Path) -> Result<String> {
    let path = MatrixPaths::new(stem).matrix;
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut header = String::new();
    BufReader::new(file)
        .read_line(&mut header)
        .map_err(|e| Error::io(&path, e))?;
    parse_spmat_header(header.trim_end()).map(|h| h.3)
}

fn parse_spmat_header(header: &str) -> Result<(usize, usize, usize, String)> {
    match header.split(' ').collect::<Vec<_>>().as_slice() {
        ["SPMAT", "v1", rows, cols, nnz, key] => Ok((
            parse_num(rows, header)?,
            parse_num(cols, header)?,
            parse_num(nnz, header)?,
            key.to_string(),
        )),
        _ => Err(Error::Format(format!("bad matrix header {header:?}"))),
    }
}

/// Loads a matrix written by [`save_matrix`]. `expected_key` is the cache key
/// the caller derived for the content it wants; any other key is stale.
pub fn load_matrix(
    stem: &Path,
    config: FeatureConfig,
    expected_key: &str,
) -> Result<FeatureMatrix> {
    let paths = MatrixPaths::new(stem);
    let text = util::read_to_string(&paths.matrix)?;
    let mut lines = text.lines();
    let (rows, cols, nnz, key) = parse_spmat_header(lines.next().unwrap_or_default())?;
    if key != expected_key {
        return Err(Error::StaleCache {
            expected: expected_key.to_owned(),
            found: key,
        });
    }
    let mut triplets = Vec::with_capacity(nnz);
    for line in lines {
        let parts: Vec<&str> = line.split(' ').collect();
        let [r, c, v] = parts.as_slice() else {
            return Err(Error::Format(format!("bad matrix line {line:?}")));
        };
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Format(format!("bad value in {line:?}")))?;
        triplets.push((parse_num(r, line)?, parse_num(c, line)?, v));
    }
    if triplets.len() != nnz {
        return Err(Error::Format(format!(
            "header announces {nnz} entries, found {}",
            triplets.len()
        )));
    }
    let matrix = SparseMatrix::from_triplets(rows, cols, &triplets)
        .map_err(|e| Error::Format(e.to_string()))?;

    let mut terms = Vec::new();
    for (i, line) in util::read_to_string(&paths.vocab)?.lines().enumerate() {
        let (idx, term) = line
            .split_once('\t')
            .ok_or_else(|| Error::Format(format!("bad vocabulary line {line:?}")))?;
        if parse_num(idx, line)? != i {
            return Err(Error::Format(format!(
                "vocabulary index out of order at {line:?}"
            )));
        }
        terms.push(term.to_owned());
    }
    let df_text = util::read_to_string(&paths.doc_freq)?;
    let mut df_lines = df_text.lines();
    let df_header = df_lines.next().unwrap_or_default();
    let (n_docs, range) = match df_header.split(' ').collect::<Vec<_>>().as_slice() {
        ["DF", "v1", n, range] => (parse_num(n, df_header)?, range.parse::<NgramRange>()?),
        _ => return Err(Error::Format(format!("bad df header {df_header:?}"))),
    };
    let doc_freq = df_lines
        .map(|l| parse_num(l, l))
        .collect::<Result<Vec<_>>>()?;
    let vocab = Vocabulary::from_parts(range, terms, doc_freq, n_docs)?;
    let row_ids: Vec<String> = util::read_to_string(&paths.rows)?
        .lines()
        .map(str::to_owned)
        .collect();
    if row_ids.len() != rows {
        return Err(Error::Format(format!(
            "{} row ids for {rows} rows",
            row_ids.len()
        )));
    }
    let rules_appended = cols == vocab.len() + PATTERN_COUNT && config.append_rules;
    if cols != vocab.len() && !rules_appended {
        return Err(Error::Format(format!(
            "{cols} columns for a vocabulary of {}",
            vocab.len()
        )));
    }
    Ok(FeatureMatrix {
        matrix,
        vocab,
        config,
        row_ids,
        key,
        rules_appended,
    })
}
