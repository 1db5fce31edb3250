//! Word lists vendored with the crate.

use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

use crate::util;

/// Identifier of the bundled English stopword list.
pub const STOPWORD_LIST_ID: &str = "en-v1";

const STOPWORDS_SRC: &str = include_str!("../../data/stopwords_en.txt");
const LEXICON_SRC: &str = include_str!("../../data/lexicon_en.txt");
const EXCEPTIONS_SRC: &str = include_str!("../../data/lemma_exceptions.tsv");

fn lines(src: &'static str) -> impl Iterator<Item = &'static str> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub static STOPWORDS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| lines(STOPWORDS_SRC).collect());

pub static LEXICON: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| lines(LEXICON_SRC).collect());

pub static LEMMA_EXCEPTIONS: LazyLock<HashMap<&'static str, &'static str>> = LazyLock::new(|| {
    lines(EXCEPTIONS_SRC)
        .filter_map(|l| l.split_once('\t'))
        .collect()
});

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(word)
}

pub fn stopwords_digest() -> String {
    util::digest_parts([STOPWORD_LIST_ID, STOPWORDS_SRC])
}

pub fn lemma_resources_digest() -> String {
    util::digest_parts([LEXICON_SRC, EXCEPTIONS_SRC])
}
