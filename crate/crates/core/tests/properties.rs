use lengthlogd::dataset::{categorize, compute_thresholds, split, Category, Split, SplitRatios, ThresholdPolicy};
use lengthlogd::descriptors::morgan_fingerprint;
use lengthlogd::ensemble::{apply_adaptive, inverse_error_weights};
use lengthlogd::smiles::{parse_smiles, smiles_length};
use lengthlogd::synth::peptide_smiles;
use proptest::prelude::*;

fn peptide() -> impl Strategy<Value = String> {
    (prop::collection::vec(0usize..18, 2..10), any::<bool>(), prop::collection::vec(any::<bool>(), 10))
        .prop_map(|(residues, cyclic, methyl)| peptide_smiles(&residues, cyclic, &methyl[..residues.len()]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parser_is_deterministic(s in peptide()) {
        let a = parse_smiles(&s).unwrap();
        let b = parse_smiles(&s).unwrap();
        prop_assert_eq!(a.smiles_length, smiles_length(&s));
        prop_assert_eq!(a.atom_count(), b.atom_count());
        prop_assert_eq!(a.distance_matrix(), b.distance_matrix());
        prop_assert_eq!(morgan_fingerprint(&a, 2, 256), morgan_fingerprint(&b, 2, 256));
    }

    #[test]
    fn thresholds_ignore_row_order(mut lengths in prop::collection::vec(5usize..200, 3..60), rot in 0usize..60) {
        let t = compute_thresholds(&lengths).unwrap();
        prop_assert!(t.q33 <= t.q66);
        let k = rot % lengths.len();
        lengths.rotate_left(k);
        lengths.reverse();
        prop_assert_eq!(compute_thresholds(&lengths).unwrap(), t);
    }

    #[test]
    fn routing_partitions_lengths(lengths in prop::collection::vec(5usize..200, 3..60)) {
        let t = compute_thresholds(&lengths).unwrap();
        for &l in &lengths {
            let c = categorize(l, &t);
            let expected = if (l as f64) <= t.q33 {
                Category::Short
            } else if (l as f64) <= t.q66 {
                Category::Medium
            } else {
                Category::Long
            };
            prop_assert_eq!(c, expected);
        }
    }

    #[test]
    fn split_assigns_every_row_once(lengths in prop::collection::vec(5usize..200, 10..120), seed in any::<u64>()) {
        let s = split(&lengths, SplitRatios::default(), seed, ThresholdPolicy::Train).unwrap();
        prop_assert_eq!(s.splits.len(), lengths.len());
        let total: usize = [Split::Train, Split::Val, Split::Test].iter().map(|&sp| s.indices(None, sp).len()).sum();
        prop_assert_eq!(total, lengths.len());
        prop_assert!(!s.indices(None, Split::Train).is_empty());
        let again = split(&lengths, SplitRatios::default(), seed, ThresholdPolicy::Train).unwrap();
        prop_assert_eq!(again.splits, s.splits);
    }

    #[test]
    fn weights_sum_to_one(e in prop::array::uniform3(1e-6f64..10.0), alpha in 0.0f64..5.0) {
        let w = inverse_error_weights(e).unwrap();
        let sum: f64 = w.as_array().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(w.as_array().iter().all(|&x| x > 0.0));
        let a = apply_adaptive(w, alpha);
        let sum: f64 = a.as_array().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }
}
