use botlens::eval::{
    cross_validate_matrix, pr_curve, roc_curve, spread_subsample, stratified_folds, threshold_rule_sweep, Criterion,
};
use botlens::features::{cap_star, CapAdjustment};
use botlens::{Algorithm, Execution, FeatureMatrix, FeatureSchema, Label, LabeledDataset, LearnerSpec};
use proptest::prelude::*;

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<Label>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..8).prop_map(|v| v as f64 / 8.0), n),
            prop::collection::vec(any::<bool>(), n - 2),
        )
            .prop_map(|(s, mut l)| {
                l.push(true);
                l.push(false);
                (s, l.into_iter().map(Label::from_bool).collect())
            })
    })
}

proptest! {
    #[test]
    fn auc_bounded_and_antisymmetric((scores, labels) in scored()) {
        let roc = roc_curve(&scores, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&roc.auc));
        let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
        let back = roc_curve(&flipped, &labels).unwrap();
        prop_assert!((roc.auc + back.auc - 1.0).abs() < 1e-12);
        let pr = pr_curve(&scores, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&pr.auc));
    }

    #[test]
    fn sweep_never_worse_than_all_bot((scores, labels) in scored()) {
        let r = threshold_rule_sweep(&scores, &labels, Criterion::BalancedAccuracy).unwrap();
        prop_assert!(r.metrics.balanced_accuracy >= 0.5);
        prop_assert_eq!(r.counts.total(), scores.len());
    }

    #[test]
    fn folds_partition_and_stratify(bots in 3usize..40, humans in 3usize..80, k in 2usize..4, seed in any::<u64>()) {
        let labels: Vec<Label> = (0..bots + humans).map(|i| Label::from_bool(i < bots)).collect();
        let plan = stratified_folds(&labels, k, seed).unwrap();
        let mut seen = vec![false; labels.len()];
        for f in 0..k {
            let test = plan.test_indices(f);
            let train = plan.train_indices(f);
            prop_assert_eq!(test.len() + train.len(), labels.len());
            for i in test {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn subsample_caps_majority(minority in 1usize..50, majority in 1usize..300, ratio in 1.0f64..4.0, seed in any::<u64>()) {
        let mk = |id: usize, label| {
            let mut a = blank_account(id as u64);
            a.label = label;
            a
        };
        let accounts = (0..minority).map(|i| mk(i, Label::Bot))
            .chain((0..majority).map(|i| mk(10_000 + i, Label::Human)))
            .collect();
        let ds = LabeledDataset::new("p", accounts);
        let sub = spread_subsample(&ds, ratio, seed).unwrap();
        let (small, large) = (minority.min(majority), minority.max(majority));
        let cap = (ratio * small as f64).floor() as usize;
        prop_assert_eq!(sub.len(), small + large.min(cap));
        let pos = |id| ds.accounts().iter().position(|a| a.id == id).unwrap();
        let ordered = sub.accounts().windows(2).all(|w| pos(w[0].id) < pos(w[1].id));
        prop_assert!(ordered);
    }

    #[test]
    fn cap_star_bounded_and_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, domain in 0.001f64..=1.0) {
        let adj = CapAdjustment::new(0.15, domain).unwrap();
        let (x, y) = (cap_star(a.min(b), &adj).unwrap(), cap_star(a.max(b), &adj).unwrap());
        prop_assert!((0.0..=1.0).contains(&x) && x <= y);
    }
}

fn blank_account(id: u64) -> botlens::AccountRecord {
    use chrono::TimeZone;
    botlens::AccountRecord {
        id,
        screen_name: format!("u{id}"),
        created_at: chrono::Utc.timestamp_opt(0, 0).unwrap(),
        friends_count: 0,
        followers_count: 0,
        statuses_count: 0,
        listed_count: 0,
        name: None,
        location: None,
        description: None,
        url: None,
        has_default_profile_image: false,
        timeline: Vec::new(),
        botometer_cap_uni: None,
        label: Label::Human,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn parallel_and_sequential_agree(seed in any::<u64>(), alg in prop::sample::select(Algorithm::ALL.to_vec())) {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 37 % 11) as f64, (i % 2) as f64 + (i % 5) as f64]).collect();
        let labels: Vec<Label> = (0..40).map(|i| Label::from_bool(i % 2 == 0)).collect();
        let m = FeatureMatrix::new(FeatureSchema::numeric(["a", "b"]), rows, labels);
        let spec = LearnerSpec::new(alg, seed);
        let s = cross_validate_matrix(&m, &spec, 4, seed, Execution::Sequential).unwrap();
        let p = cross_validate_matrix(&m, &spec, 4, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(s, p);
    }
}
