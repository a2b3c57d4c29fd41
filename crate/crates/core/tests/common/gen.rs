//! Random generators for wire-codec round trips, plus the pinned value
//! of the committed golden frame.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fedscreen_core::classifiers::{
    tree_train, ForestModel, LinearSvcModel, ModelParams, TreeConfig, TreeModel, TreeNode,
};
use fedscreen_core::dataset::SourceId;
use fedscreen_core::federation::{Body, ClientUpdate, Envelope};

/// Floats that stress the serializer: plain ranges, exact powers of
/// two, 17-significant-digit values, tiny and huge magnitudes.
pub fn spicy_f64(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..6u8) {
        0 => rng.random_range(-10.0..10.0),
        1 => f64::from(rng.random_range(-1000..1000i16)),
        2 => rng.random_range(-1.0..1.0) * 1e-300,
        3 => rng.random_range(-1.0..1.0) * 1e300,
        4 => {
            f64::from_bits(rng.random::<u64>() & 0x7fef_ffff_ffff_ffff)
                * if rng.random_bool(0.5) { -1.0 } else { 1.0 }
        }
        _ => rng.random::<f64>() + 1.0 / 3.0,
    }
}

pub fn random_source(rng: &mut ChaCha8Rng) -> SourceId {
    *SourceId::ALL.choose(rng).expect("non-empty")
}

pub fn random_svc(rng: &mut ChaCha8Rng) -> LinearSvcModel {
    let d = rng.random_range(1..=6);
    LinearSvcModel {
        weights: (0..d).map(|_| spicy_f64(rng)).collect(),
        bias: spicy_f64(rng),
        regularization_c: rng.random_range(0.1..5.0),
        feature_means: (0..d).map(|_| rng.random_range(-3.0..3.0)).collect(),
        feature_scales: (0..d).map(|_| rng.random_range(0.1..3.0)).collect(),
    }
}

pub fn random_tree(rng: &mut ChaCha8Rng) -> TreeModel {
    let n = rng.random_range(2..=10);
    let arity = rng.random_range(1..=3);
    let features: Vec<Vec<f64>> =
        (0..n).map(|_| (0..arity).map(|_| rng.random_range(-4.0..4.0)).collect()).collect();
    let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
    let cfg = TreeConfig { max_depth: rng.random_range(0..=3), min_samples_leaf: 1 };
    tree_train(&features, &labels, &cfg).expect("tree trains")
}

pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    match rng.random_range(0..3u8) {
        0 => ModelParams::Svc(random_svc(rng)),
        1 => ModelParams::Dt(random_tree(rng)),
        _ => {
            let trees: Vec<TreeModel> =
                (0..rng.random_range(1..=5)).map(|_| random_tree(rng)).collect();
            // A forest's trees must agree on arity; keep the ones that
            // happen to match the first tree instead of retraining.
            let arity = trees[0].arity;
            let trees: Vec<TreeModel> = trees.into_iter().filter(|t| t.arity == arity).collect();
            ModelParams::Rf(ForestModel {
                trees,
                features_per_split: rng.random_range(1..=3),
                seed: rng.random(),
            })
        }
    }
}

pub fn random_update(rng: &mut ChaCha8Rng) -> ClientUpdate {
    ClientUpdate {
        client_id: random_source(rng),
        params: random_params(rng),
        n_samples: rng.random_range(1..100_000),
        local_validation_accuracy: rng.random_range(0.0..=1.0),
    }
}

/// The value the committed golden frame must decode to.
pub fn golden_envelope() -> Envelope {
    Envelope::new(
        5,
        Body::Update(ClientUpdate {
            client_id: SourceId::AdultsUci,
            params: ModelParams::Dt(TreeModel {
                nodes: vec![
                    TreeNode::Split { feature: 2, threshold: 0.5, left: 1, right: 2 },
                    TreeNode::Leaf { label: 0, class_counts: [17, 3] },
                    TreeNode::Leaf { label: 1, class_counts: [2, 20] },
                ],
                max_depth: 4,
                arity: 10,
            }),
            n_samples: 42,
            local_validation_accuracy: 0.9136690647482014,
        }),
    )
}
