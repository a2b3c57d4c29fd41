//! Cross-check of the greedy tree trainer against an independent
//! brute-force oracle (see `common::oracle` for the re-derived rule).

mod common;

use common::oracle::{oracle_predict, oracle_train, random_dataset};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fedscreen_core::classifiers::{tree_predict, tree_train, TreeConfig};

#[test]
fn greedy_tree_matches_the_exhaustive_split_oracle() {
    let checked_rows = common::oracle::check_oracle_cases(7, 400);
    assert!(checked_rows > 1000, "exercised only {checked_rows} rows");
}

#[test]
fn oracle_agreement_holds_at_larger_depth_too() {
    // Beyond the pinned bound: depth up to 4 over slightly larger grids.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let n = rng.random_range(2..=20);
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..2).map(|_| f64::from(rng.random_range(0..5u8))).collect())
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let cfg = TreeConfig { max_depth: 4, min_samples_leaf: 1 };
        let model = tree_train(&features, &labels, &cfg).unwrap();
        let rows: Vec<(Vec<f64>, u8)> =
            features.iter().cloned().zip(labels.iter().copied()).collect();
        let oracle = oracle_train(&rows, 4, 1);
        for (x, _) in &rows {
            assert_eq!(
                tree_predict(&model, x).unwrap(),
                oracle_predict(&oracle, x),
                "case {case}: disagreement at {x:?}"
            );
        }
    }
}

#[test]
fn random_datasets_stay_inside_the_pinned_envelope() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (features, labels) = random_dataset(&mut rng);
        assert!((1..=12).contains(&features.len()));
        assert!((1..=3).contains(&features[0].len()));
        assert_eq!(features.len(), labels.len());
    }
}
