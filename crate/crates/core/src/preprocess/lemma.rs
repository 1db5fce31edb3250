//! Dictionary-backed lemmatizer: an exception table for irregular forms,
//! then suffix rules whose output is checked against the bundled lexicon.

use super::is_placeholder;
use super::resources::{is_stopword, LEMMA_EXCEPTIONS, LEXICON};

/// Upper bound on rule applications for one word; every rule shortens the
/// word or maps it to a fixed point, so this is never reached in practice.
const MAX_STEPS: usize = 8;

/// Returns the lemma of a single lowercase token. Placeholders and hashtags
/// are returned unchanged, as are words whose lemma would be a stopword.
pub fn lemma(word: &str) -> String {
    if is_placeholder(word) || word.starts_with('#') {
        return word.to_owned();
    }
    let mut current = word.to_owned();
    for _ in 0..MAX_STEPS {
        match step(&current) {
            Some(next) if next != current => current = next,
            _ => break,
        }
    }
    if is_stopword(&current) {
        word.to_owned()
    } else {
        current
    }
}

fn known(word: &str) -> bool {
    LEXICON.contains(word) || LEMMA_EXCEPTIONS.values().any(|l| *l == word)
}

fn undouble(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3
        && b[n - 1] == b[n - 2]
        && !matches!(b[n - 1], b'a' | b'e' | b'i' | b'o' | b'u' | b's' | b'l')
    {
        Some(stem[..n - 1].to_owned())
    } else {
        None
    }
}

/// First dictionary word among the stem variants.
fn validated(stem: &str) -> Option<String> {
    let mut candidates = vec![stem.to_owned(), format!("{stem}e")];
    candidates.extend(undouble(stem));
    if let Some(s) = stem.strip_suffix('i') {
        candidates.push(format!("{s}y"));
    }
    candidates.into_iter().find(|c| known(c))
}

fn step(word: &str) -> Option<String> {
    if let Some(l) = LEMMA_EXCEPTIONS.get(word) {
        return Some((*l).to_owned());
    }
    if word.len() > 4 {
        if let Some(stem) = word.strip_suffix("ies") {
            return Some(format!("{stem}y"));
        }
    }
    if let Some(stem) = word.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    if word.len() >= 4
        && word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
        && !word.ends_with('\'')
    {
        return Some(word[..word.len() - 1].to_owned());
    }
    if word.len() > 4 {
        if let Some(stem) = word.strip_suffix("ing") {
            return validated(stem);
        }
    }
    if word.len() > 3 {
        if let Some(stem) = word.strip_suffix("ed") {
            return validated(stem);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_and_irregular_forms() {
        assert_eq!(lemma("writes"), "write");
        assert_eq!(lemma("wrote"), "write");
        assert_eq!(lemma("running"), "run");
        assert_eq!(lemma("cities"), "city");
        assert_eq!(lemma("going"), "go");
        assert_eq!(lemma("goes"), "go");
        assert_eq!(lemma("donating"), "donate");
        assert_eq!(lemma("donated"), "donate");
        assert_eq!(lemma("needed"), "need");
        assert_eq!(lemma("supplies"), "supply");
        assert_eq!(lemma("glasses"), "glass");
        assert_eq!(lemma("shelters"), "shelter");
    }

    #[test]
    fn protected_tokens() {
        assert_eq!(lemma("_URL_"), "_URL_");
        assert_eq!(lemma("_NUM_"), "_NUM_");
        assert_eq!(lemma("#floods"), "#floods");
    }

    #[test]
    fn unvalidated_stems_are_kept() {
        assert_eq!(lemma("morning"), "morning");
        assert_eq!(lemma("need"), "need");
        assert_eq!(lemma("status"), "status");
        assert_eq!(lemma("bus"), "bus");
    }

    #[test]
    fn lemma_is_a_fixed_point() {
        for w in [
            "writes",
            "running",
            "cities",
            "bringings",
            "evenings",
            "glasses",
            "donated",
            "clothes",
        ] {
            let l = lemma(w);
            assert_eq!(lemma(&l), l, "{w}");
        }
        for w in LEXICON.iter() {
            assert_eq!(lemma(w), lemma(&lemma(w)), "{w}");
        }
    }
}
