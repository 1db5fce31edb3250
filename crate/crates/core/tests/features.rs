mod support;

use proptest::prelude::*;
use rweet_core::corpus::{synth_corpus, LabelDomain};
use rweet_core::features::{
    build_features, build_vocabulary, cosine_similarity, enumerate_combos, extract_ngrams,
    load_matrix, save_matrix, vectorize_tf, vectorize_tfidf, FeatureConfig, Featurizer, MatrixView,
    NgramRange, Vectorizer,
};
use rweet_core::pipeline::prepare;
use rweet_core::preprocess::PipelineConfig;
use rweet_core::Error;
use support::{clean_corpus, dense_counts, dense_idf};

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn pair_cosine(lo: usize, hi: usize) -> f64 {
    let docs = [words("He loves me"), words("He likes me")];
    let vocab = build_vocabulary(&docs, NgramRange::new(lo, hi).unwrap(), 1, 1.0).unwrap();
    let m = vectorize_tf(&docs, &vocab);
    cosine_similarity(m.row(0), m.row(1)).unwrap()
}

#[test]
fn cosine_worked_example() {
    assert!((pair_cosine(1, 2) - 0.4).abs() < 1e-12);
    assert!((pair_cosine(1, 3) - 1.0 / 3.0).abs() < 1e-12);
    // unigrams: two shared terms over two three-term documents
    assert!((pair_cosine(1, 1) - 2.0 / 3.0).abs() < 1e-12);
    assert!(pair_cosine(1, 1) > pair_cosine(1, 2) && pair_cosine(1, 2) > pair_cosine(1, 3));
}

#[test]
fn combos_follow_table_order() {
    let all = enumerate_combos();
    let ranges = NgramRange::all();
    for (i, c) in all.iter().enumerate() {
        assert_eq!(
            c.vectorizer,
            if i < 12 {
                Vectorizer::Tf
            } else {
                Vectorizer::TfIdf
            }
        );
        assert_eq!(c.append_rules, i % 12 >= 6);
        assert_eq!(c.ngrams, ranges[i % 6]);
        assert!(c.l2_normalize);
    }
    let ten = FeatureConfig::combo(10).unwrap();
    assert_eq!(
        ten,
        FeatureConfig::new(Vectorizer::Tf, NgramRange::new(1, 2).unwrap(), true)
    );
}

#[test]
fn all_combos_on_a_synthetic_corpus() {
    let d = synth_corpus(21, 50, &LabelDomain::binary()).unwrap();
    let p = prepare(&d, &PipelineConfig::default()).unwrap();
    let all = enumerate_combos();
    let mats: Vec<_> = all
        .iter()
        .map(|c| build_features(&p.corpus, Some(&p.rules), *c).unwrap())
        .collect();
    for (i, m) in mats.iter().enumerate() {
        assert_eq!(m.rows(), p.corpus.len());
        assert_eq!(m.row_ids, p.corpus.ids());
        let expected = m.vocab.len() + if all[i].append_rules { 18 } else { 0 };
        assert_eq!(m.cols(), expected);
    }
    for block in [0, 12] {
        for j in 0..6 {
            assert_eq!(mats[block + j + 6].cols(), mats[block + j].cols() + 18);
        }
    }
}

#[test]
fn matrix_cache_files() {
    let d = synth_corpus(4, 40, &LabelDomain::categorical()).unwrap();
    let p = prepare(&d, &PipelineConfig::default()).unwrap();
    let cfg = FeatureConfig::combo(22).unwrap();
    let m = build_features(&p.corpus, Some(&p.rules), cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join(&m.key);
    save_matrix(&stem, &m).unwrap();
    assert_eq!(load_matrix(&stem, cfg, &m.key).unwrap(), m);
    let vocab = std::fs::read_to_string(stem.with_extension("vocab")).unwrap();
    assert!(vocab
        .lines()
        .enumerate()
        .all(|(i, l)| l.starts_with(&format!("{i}\t"))));
    let other =
        build_features(&p.corpus, Some(&p.rules), FeatureConfig::combo(21).unwrap()).unwrap();
    assert!(matches!(
        load_matrix(&stem, cfg, &other.key),
        Err(Error::StaleCache { .. })
    ));
    assert!(matches!(
        load_matrix(&dir.path().join("absent"), cfg, &m.key),
        Err(Error::NotFound(_))
    ));
}

#[test]
fn held_out_terms_are_ignored() {
    let train = clean_corpus(&[words("need food now"), words("need water")]);
    let test = clean_corpus(&[words("need blankets now")]);
    let f = Featurizer::fit(&train, FeatureConfig::combo(1).unwrap()).unwrap();
    let x = f.transform(&test, None, MatrixView::Counts).unwrap();
    assert_eq!(x.cols(), 4);
    assert_eq!(x.matrix.row(0).nnz(), 2);
}

fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = prop::sample::select(vec![
        "need", "food", "water", "help", "storm", "shelter", "now", "we",
    ]);
    prop::collection::vec(
        prop::collection::vec(word.prop_map(str::to_owned), 0..8),
        1..=10,
    )
}

fn range_strategy() -> impl Strategy<Value = NgramRange> {
    prop::sample::select(NgramRange::all().to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sparse_matches_dense_oracle(docs in corpus_strategy(), range in range_strategy()) {
        let Ok(vocab) = build_vocabulary(&docs, range, 1, 1.0) else {
            // every document shorter than the smallest n
            prop_assert!(docs.iter().all(|d| d.len() < range.lo()));
            return Ok(());
        };
        let dense = dense_counts(&docs, vocab.terms(), range.lo(), range.hi());
        let tf = vectorize_tf(&docs, &vocab).to_dense();
        let tfidf = vectorize_tfidf(&docs, &vocab).to_dense();
        for r in 0..docs.len() {
            for c in 0..vocab.len() {
                prop_assert!((tf[r][c] - dense[r][c]).abs() <= 1e-12);
                prop_assert!((tfidf[r][c] - dense[r][c] * dense_idf(&dense, c)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn vocabulary_invariants(docs in corpus_strategy(), range in range_strategy(), min_df in 1usize..3) {
        if let Ok(vocab) = build_vocabulary(&docs, range, min_df, 1.0) {
            for (i, t) in vocab.terms().iter().enumerate() {
                prop_assert_eq!(vocab.column(t), Some(i));
                let n = t.split(' ').count();
                prop_assert!(n >= range.lo() && n <= range.hi());
                prop_assert!(vocab.doc_freq(i) >= min_df);
            }
        }
    }

    #[test]
    fn normalized_rows_have_unit_norm(docs in corpus_strategy(), combo in 1usize..=24) {
        let corpus = clean_corpus(&docs);
        let cfg = FeatureConfig::combo(combo).unwrap();
        let Ok(f) = Featurizer::fit(&corpus, cfg) else { return Ok(()); };
        let cfg_rules_off = FeatureConfig { append_rules: false, ..cfg };
        let f = if cfg.append_rules { Featurizer::fit(&corpus, cfg_rules_off).unwrap() } else { f };
        let m = f.transform(&corpus, None, MatrixView::Weighted).unwrap();
        for r in 0..m.rows() {
            let norm = m.matrix.row(r).norm();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ngram_count(tokens in prop::collection::vec("[a-z]{1,4}", 0..10), n in 1usize..4) {
        let grams = extract_ngrams(&tokens, n);
        prop_assert_eq!(grams.len(), (tokens.len() + 1).saturating_sub(n));
        for g in &grams {
            prop_assert_eq!(g.split(' ').count(), n);
        }
    }
}
