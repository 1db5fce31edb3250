mod support;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rweet_core::corpus::LabelDomain;
use rweet_core::features::{l2_normalize_rows, FeatureConfig};
use rweet_core::models::{
    cross_validate, gradient_check, gradient_check_with_step, predict_nb, stratified_kfold,
    train_logreg_traced, train_nb, LogisticRegression, NaiveBayes, TrainConfig,
};
use rweet_core::sparse::SparseMatrix;
use support::{labeled_corpus, nb_posteriors};

/// Dense-ish random instance with every class present.
fn instance(seed: u64, rows: usize, cols: usize, k: usize) -> (SparseMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.random_bool(0.3) {
                        0.0
                    } else {
                        rng.random_range(-2.0..2.0)
                    }
                })
                .collect()
        })
        .collect();
    let y = (0..rows)
        .map(|r| if r < k { r } else { rng.random_range(0..k) })
        .collect();
    (SparseMatrix::from_dense(&dense, cols), y)
}

#[test]
fn gradient_check_over_seeds() {
    for seed in 0..100 {
        let k = 2 + (seed as usize % 3);
        let (x, y) = instance(seed, 6, 4, k);
        let cfg = TrainConfig {
            seed,
            lambda: if seed % 2 == 0 { 0.0 } else { 0.3 },
            ..TrainConfig::default()
        };
        let err = gradient_check(&x, &y, k, &cfg).unwrap();
        assert!(err <= 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn gradient_error_shrinks_with_step() {
    let (x, y) = instance(42, 6, 4, 3);
    let cfg = TrainConfig {
        lambda: 0.1,
        ..TrainConfig::default()
    };
    let coarse = gradient_check_with_step(&x, &y, 3, &cfg, 1e-3).unwrap();
    let fine = gradient_check_with_step(&x, &y, 3, &cfg, 1e-5).unwrap();
    assert!(fine < coarse, "{fine} vs {coarse}");
}

fn toy_unit() -> (SparseMatrix, Vec<usize>) {
    let (x, y) = instance(7, 12, 5, 3);
    (l2_normalize_rows(&x), y)
}

#[test]
fn fixed_step_loss_never_increases() {
    let (x, y) = toy_unit();
    let d = LabelDomain::new("abc", ["a", "b", "c"]).unwrap();
    let cfg = TrainConfig {
        learning_rate: 1e-2,
        adaptive: false,
        tolerance: 0.0,
        max_epochs: 300,
        ..TrainConfig::default()
    };
    let (_, history) = train_logreg_traced(&x, &y, &d, &cfg).unwrap();
    assert_eq!(history.len(), 301);
    for w in history.windows(2) {
        assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn adaptive_schedule_reaches_lower_loss() {
    let (x, y) = toy_unit();
    let d = LabelDomain::new("abc", ["a", "b", "c"]).unwrap();
    let fixed = TrainConfig {
        adaptive: false,
        ..TrainConfig::default()
    };
    let (_, a) = train_logreg_traced(&x, &y, &d, &TrainConfig::default()).unwrap();
    let (_, f) = train_logreg_traced(&x, &y, &d, &fixed).unwrap();
    assert!(a.last() < f.last());
    for w in a.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn training_is_deterministic() {
    let (x, y) = instance(3, 20, 6, 3);
    let d = LabelDomain::new("abc", ["a", "b", "c"]).unwrap();
    let a = train_logreg_traced(&x, &y, &d, &TrainConfig::default()).unwrap();
    let b = train_logreg_traced(&x, &y, &d, &TrainConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn nb_worked_example() {
    // columns: need, food, shelter, sunny, day
    let x = vec![
        vec![1.0, 1.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0, 1.0],
    ];
    let y = vec![0, 0, 1];
    let d = LabelDomain::new("rn", ["R", "N"]).unwrap();
    let m = train_nb(&SparseMatrix::from_dense(&x, 5), &y, &d, 1.0).unwrap();
    let q = vec![1.0, 1.0, 0.0, 0.0, 0.0];
    let oracle = nb_posteriors(&x, &y, 2, 1.0, &q);
    let got = m.posteriors(&SparseMatrix::from_dense(&[q], 5)).unwrap();
    assert!(oracle[0] > oracle[1]);
    for c in 0..2 {
        assert!((got[0][c] - oracle[c]).abs() < 1e-9);
    }
}

fn count_corpus() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, Vec<f64>)> {
    (1usize..=5, 1usize..=10).prop_flat_map(|(docs, terms)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..4, terms), docs),
            prop::collection::vec(0usize..3, docs),
            prop::collection::vec(0u8..4, terms),
        )
            .prop_map(|(x, y, q)| {
                let f = |v: Vec<u8>| v.into_iter().map(f64::from).collect::<Vec<_>>();
                (x.into_iter().map(f).collect(), y, f(q))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nb_matches_brute_force((x, y, q) in count_corpus(), alpha in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let cols = q.len();
        let d = LabelDomain::new("abc", ["a", "b", "c"]).unwrap();
        let m = train_nb(&SparseMatrix::from_dense(&x, cols), &y, &d, alpha).unwrap();
        let mut queries = x.clone();
        queries.push(q);
        let got = m.posteriors(&SparseMatrix::from_dense(&queries, cols)).unwrap();
        for (row, query) in got.iter().zip(&queries) {
            let oracle = nb_posteriors(&x, &y, 3, alpha, query);
            for c in 0..3 {
                prop_assert!((row[c] - oracle[c]).abs() < 1e-9, "{row:?} vs {oracle:?}");
            }
        }
        for c in 0..3 {
            let total: f64 = m.log_likelihood(c).iter().map(|v| v.exp()).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
        let empty = predict_nb(&m, &SparseMatrix::zeros(1, cols)).unwrap()[0];
        let prior = m.log_prior();
        let best = (0..3).fold(0, |b, c| if prior[c] > prior[b] { c } else { b });
        prop_assert_eq!(empty, best);
    }

    #[test]
    fn stratification_bounds(counts in prop::collection::vec(0usize..30, 2..6), k in 2usize..7, seed in any::<u64>()) {
        let mut y = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            let n = if n > 0 { n.max(k) } else { 0 };
            y.extend(std::iter::repeat_n(c, n));
        }
        prop_assume!(!y.is_empty());
        let labels: Vec<String> = (0..counts.len()).map(|c| format!("c{c}")).collect();
        let d = LabelDomain::new("strat", labels).unwrap();
        let plan = stratified_kfold(&y, &d, k, seed).unwrap();
        prop_assert_eq!(plan.assignments().len(), y.len());
        for f in 0..k {
            let test = plan.test_indices(f);
            for c in 0..counts.len() {
                let n_c = y.iter().filter(|&&v| v == c).count() as f64;
                let in_fold = test.iter().filter(|&&i| y[i] == c).count() as f64;
                prop_assert!((in_fold - n_c / k as f64).abs() <= 1.0);
            }
        }
        prop_assert_eq!(plan.to_text(), stratified_kfold(&y, &d, k, seed).unwrap().to_text());
    }
}

fn separable() -> Vec<(&'static str, &'static str)> {
    let mut docs = Vec::new();
    for i in 0..10 {
        docs.push((
            "rweet",
            [
                "need food",
                "please donate",
                "need water",
                "send help",
                "donate blood",
            ][i % 5],
        ));
        docs.push((
            "not_rweet",
            [
                "sunny day",
                "storm passed",
                "calm night",
                "nice sunset",
                "quiet morning",
            ][i % 5],
        ));
    }
    docs
}

#[test]
fn cross_validation_on_separable_corpus() {
    let corpus = labeled_corpus(&separable());
    let d = LabelDomain::binary();
    let cfg = FeatureConfig {
        append_rules: false,
        ..FeatureConfig::combo(4).unwrap()
    };
    let lr = cross_validate(&LogisticRegression::default(), &corpus, None, &d, cfg, 5, 1).unwrap();
    assert_eq!(lr.pooled.accuracy, 1.0);
    assert_eq!(lr.confusion.total() as usize, corpus.len());
    assert_eq!(lr.folds.len(), 5);
    let again =
        cross_validate(&LogisticRegression::default(), &corpus, None, &d, cfg, 5, 1).unwrap();
    assert_eq!(lr, again);
    let nb = cross_validate(&NaiveBayes::default(), &corpus, None, &d, cfg, 5, 1).unwrap();
    assert_eq!(nb.pooled.accuracy, 1.0);
}

#[test]
fn every_tweet_predicted_once() {
    let docs: Vec<(&str, &str)> = (0..100)
        .map(|i| {
            if i % 3 == 0 {
                ("rweet", "need food now")
            } else {
                ("not_rweet", "storm is loud")
            }
        })
        .collect();
    let corpus = labeled_corpus(&docs);
    let cfg = FeatureConfig {
        append_rules: false,
        ..FeatureConfig::combo(1).unwrap()
    };
    let r = cross_validate(
        &NaiveBayes::default(),
        &corpus,
        None,
        &LabelDomain::binary(),
        cfg,
        5,
        9,
    )
    .unwrap();
    let mut seen = vec![0; 100];
    for f in 0..5 {
        for i in r.plan.test_indices(f) {
            seen[i] += 1;
        }
    }
    assert!(seen.iter().all(|&s| s == 1));
    assert_eq!(
        r.folds
            .iter()
            .map(|f| f.per_class.iter().map(|c| c.support).sum::<u64>())
            .sum::<u64>(),
        100
    );
}
