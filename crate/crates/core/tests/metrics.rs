use attrition::metrics::{auc_pair_count, auc_trapezoid, confusion, roc_curve};
use proptest::prelude::*;

fn labelled_scores() -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
    (2usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..2, n).prop_map(|mut l| {
                l[0] = 0;
                l[1] = 1;
                l
            }),
            prop::collection::vec(prop_oneof![(0u8..6).prop_map(|v| v as f64 / 5.0), 0.0f64..1.0], n),
        )
    })
}

fn auc(labels: &[u8], scores: &[f64]) -> f64 {
    auc_trapezoid(&roc_curve(labels, scores).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn auc_is_rank_invariant((labels, scores) in labelled_scores()) {
        let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        prop_assert!((auc(&labels, &scores) - auc(&labels, &transformed)).abs() < 1e-12);
    }

    #[test]
    fn auc_of_negated_scores_is_complement((labels, scores) in labelled_scores()) {
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc(&labels, &scores) + auc(&labels, &negated) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roc_curve_is_monotone_and_anchored((labels, scores) in labelled_scores()) {
        let curve = roc_curve(&labels, &scores).unwrap();
        let first = &curve.points[0];
        let last = curve.points.last().unwrap();
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in curve.points.windows(2) {
            prop_assert!(w[0].threshold > w[1].threshold);
            prop_assert!(w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr);
        }
    }

    #[test]
    fn trapezoid_matches_pair_count((labels, scores) in labelled_scores()) {
        let a = auc(&labels, &scores);
        let b = auc_pair_count(&labels, &scores).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn confusion_counts_partition_samples(
        pairs in prop::collection::vec((0u8..2, 0u8..2), 1..200),
    ) {
        let (labels, preds): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = confusion(&labels, &preds).unwrap();
        prop_assert_eq!(cm.total(), labels.len());
        let agree = labels.iter().zip(&preds).filter(|(a, b)| a == b).count();
        prop_assert_eq!(cm.tp + cm.tn, agree);
        let f1 = cm.f1();
        prop_assert!((0.0..=1.0).contains(&f1));
    }
}

#[test]
fn perfect_and_reversed_rankings() {
    let labels = [0, 0, 1, 1];
    assert_eq!(auc(&labels, &[0.1, 0.2, 0.8, 0.9]), 1.0);
    assert_eq!(auc(&labels, &[0.9, 0.8, 0.2, 0.1]), 0.0);
    assert_eq!(auc(&labels, &[0.5; 4]), 0.5);
}
