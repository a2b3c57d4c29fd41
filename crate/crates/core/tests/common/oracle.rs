//! An independent brute-force CART oracle that enumerates every
//! (feature, threshold) split at every node.
//!
//! The oracle re-derives the full decision rule from its documented
//! contract: candidate thresholds are midpoints of consecutive distinct
//! sorted values (rounded down to the lower value when the midpoint
//! lands on the upper float), split quality is nL·gini(L) + nR·gini(R),
//! ties go to the lowest feature then lowest threshold, leaf-label ties
//! go to 1, and rows route left on `x ≤ threshold`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fedscreen_core::classifiers::{tree_predict, tree_train, TreeConfig};

pub enum OracleTree {
    Leaf(u8),
    Split { feature: usize, threshold: f64, left: Box<OracleTree>, right: Box<OracleTree> },
}

fn oracle_gini(counts: [u64; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    let p0 = counts[0] as f64 / total;
    let p1 = counts[1] as f64 / total;
    1.0 - p0 * p0 - p1 * p1
}

fn oracle_counts(rows: &[(Vec<f64>, u8)]) -> [u64; 2] {
    let mut counts = [0u64; 2];
    for (_, y) in rows {
        counts[usize::from(*y)] += 1;
    }
    counts
}

pub fn oracle_train(rows: &[(Vec<f64>, u8)], depth_left: usize, min_leaf: usize) -> OracleTree {
    let counts = oracle_counts(rows);
    let leaf = || OracleTree::Leaf(u8::from(counts[1] >= counts[0]));
    if counts[0] == 0 || counts[1] == 0 || depth_left == 0 || rows.len() < 2 * min_leaf {
        return leaf();
    }
    let arity = rows[0].0.len();
    let mut best: Option<(f64, usize, f64)> = None;
    for feature in 0..arity {
        let mut values: Vec<f64> = rows.iter().map(|(x, _)| x[feature]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
        values.dedup();
        for pair in values.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mut threshold = (a + b) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            let mut left = [0u64; 2];
            let mut right = [0u64; 2];
            for (x, y) in rows {
                if x[feature] <= threshold {
                    left[usize::from(*y)] += 1;
                } else {
                    right[usize::from(*y)] += 1;
                }
            }
            let n_left = left[0] + left[1];
            let n_right = right[0] + right[1];
            if (n_left as usize) < min_leaf || (n_right as usize) < min_leaf {
                continue;
            }
            let score = n_left as f64 * oracle_gini(left) + n_right as f64 * oracle_gini(right);
            if best.is_none_or(|(s, _, _)| score < s) {
                best = Some((score, feature, threshold));
            }
        }
    }
    match best {
        None => leaf(),
        Some((_, feature, threshold)) => {
            let (left_rows, right_rows): (Vec<_>, Vec<_>) =
                rows.iter().cloned().partition(|(x, _)| x[feature] <= threshold);
            OracleTree::Split {
                feature,
                threshold,
                left: Box::new(oracle_train(&left_rows, depth_left - 1, min_leaf)),
                right: Box::new(oracle_train(&right_rows, depth_left - 1, min_leaf)),
            }
        }
    }
}

pub fn oracle_predict(tree: &OracleTree, x: &[f64]) -> u8 {
    match tree {
        OracleTree::Leaf(label) => *label,
        OracleTree::Split { feature, threshold, left, right } => {
            if x[*feature] <= *threshold {
                oracle_predict(left, x)
            } else {
                oracle_predict(right, x)
            }
        }
    }
}

/// One random dataset: ≤ 12 samples, ≤ 3 features, half on a coarse
/// integer grid (maximizing duplicate values and exact score ties),
/// half continuous.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<u8>) {
    let n = rng.random_range(1..=12);
    let arity = rng.random_range(1..=3);
    let gridded = rng.random_bool(0.5);
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..arity)
                .map(|_| {
                    if gridded {
                        f64::from(rng.random_range(0..4u8))
                    } else {
                        rng.random_range(-2.0..2.0)
                    }
                })
                .collect()
        })
        .collect();
    let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
    (features, labels)
}

/// Train the greedy tree and the oracle on `cases` random datasets with
/// depth ≤ 2 and compare predictions on every training row. Panics on
/// the first disagreement; returns the number of rows compared.
pub fn check_oracle_cases(seed: u64, cases: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked_rows = 0usize;
    for case in 0..cases {
        let (features, labels) = random_dataset(&mut rng);
        let max_depth = rng.random_range(0..=2);
        let cfg = TreeConfig { max_depth, min_samples_leaf: 1 };

        let model = tree_train(&features, &labels, &cfg)
            .unwrap_or_else(|e| panic!("case {case}: training failed: {e}"));
        let rows: Vec<(Vec<f64>, u8)> =
            features.iter().cloned().zip(labels.iter().copied()).collect();
        let oracle = oracle_train(&rows, max_depth, 1);

        for (i, (x, y)) in rows.iter().enumerate() {
            let got = tree_predict(&model, x).unwrap();
            let want = oracle_predict(&oracle, x);
            assert_eq!(
                got, want,
                "case {case}, row {i}: tree={got} oracle={want} (x={x:?}, y={y}, depth {max_depth})"
            );
        }
        checked_rows += rows.len();
    }
    checked_rows
}
