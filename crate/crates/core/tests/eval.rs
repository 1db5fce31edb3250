use proptest::prelude::*;
use rweet_core::eval::{accuracy, macro_metrics, micro_metrics, ConfusionMatrix, MetricsReport};

fn square() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (2usize..7).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u64..50, n), n))
}

fn cm(counts: Vec<Vec<u64>>) -> ConfusionMatrix {
    let labels = (0..counts.len()).map(|i| format!("l{i}")).collect();
    ConfusionMatrix::from_counts(labels, counts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn micro_scores_equal_accuracy(counts in square()) {
        let m = cm(counts);
        prop_assume!(m.total() > 0);
        let (p, r, f) = micro_metrics(&m);
        let a = accuracy(&m);
        prop_assert!((p - a).abs() <= 1e-12 && (r - a).abs() <= 1e-12 && (f - a).abs() <= 1e-12);
    }

    #[test]
    fn metrics_are_bounded(counts in square()) {
        let r = MetricsReport::from_confusion(&cm(counts));
        for v in [r.accuracy, r.p_micro, r.r_micro, r.f1_micro, r.p_macro, r.r_macro, r.f1_macro] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(MetricsReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn invariant_under_label_permutation(counts in square(), seed in any::<u64>()) {
        let n = counts.len();
        let mut perm: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted: Vec<Vec<u64>> = (0..n).map(|a| (0..n).map(|p| counts[perm[a]][perm[p]]).collect()).collect();
        let (a, b) = (cm(counts), cm(permuted));
        let close = |x: (f64, f64, f64), y: (f64, f64, f64)| {
            (x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12 && (x.2 - y.2).abs() < 1e-12
        };
        prop_assert!(close(micro_metrics(&a), micro_metrics(&b)));
        prop_assert!(close(macro_metrics(&a), macro_metrics(&b)));
        prop_assert!((accuracy(&a) - accuracy(&b)).abs() < 1e-12);
    }
}
