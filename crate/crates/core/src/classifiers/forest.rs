//! Random forest: bagged CART trees with per-node feature subsampling.
//!
//! Each tree gets its own counter-mode RNG stream derived from the
//! forest seed (stream index = tree index + 1), so trees are independent
//! of one another yet the whole forest is a pure function of
//! `(data, config, seed)`. Within a tree the stream first draws the
//! bootstrap rows, then one candidate-feature subset per split attempt.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{tree_predict, tree_train_sampled, TreeModel};
use super::{ClassifierError, ForestConfig, TreeConfig};

/// A trained forest; prediction is a majority vote with ties going to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    /// Candidate features drawn per split (resolved, not the config default).
    pub features_per_split: usize,
    pub seed: u64,
}

impl ForestModel {
    pub fn arity(&self) -> usize {
        self.trees.first().map_or(0, |t| t.arity)
    }
}

/// Train `n_trees` bagged trees.
pub fn forest_train(
    features: &[Vec<f64>],
    labels: &[u8],
    tree_cfg: &TreeConfig,
    cfg: &ForestConfig,
    seed: u64,
) -> Result<ForestModel, ClassifierError> {
    if cfg.n_trees == 0 {
        return Err(ClassifierError::Training("a forest needs at least one tree".into()));
    }
    let Some(first) = features.first() else {
        return Err(ClassifierError::Training("empty training set".into()));
    };
    let arity = first.len();
    let features_per_split = match cfg.features_per_split {
        Some(k) => {
            if k == 0 || k > arity {
                return Err(ClassifierError::Training(format!(
                    "features_per_split must be in 1..={arity}, got {k}"
                )));
            }
            k
        }
        None => (arity as f64).sqrt().ceil() as usize,
    };

    let n = features.len();
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for tree_idx in 0..cfg.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tree_idx as u64 + 1);

        let rows: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let bag_x: Vec<Vec<f64>> = rows.iter().map(|&i| features[i].clone()).collect();
        let bag_y: Vec<u8> = rows.iter().map(|&i| labels[i]).collect();

        let mut sampler = |available: usize| -> Vec<usize> {
            if features_per_split >= available {
                // full set: skip the draw so this case degenerates to a
                // plain tree regardless of generator state
                (0..available).collect()
            } else {
                let mut picked =
                    rand::seq::index::sample(&mut rng, available, features_per_split).into_vec();
                picked.sort_unstable();
                picked
            }
        };
        trees.push(tree_train_sampled(&bag_x, &bag_y, tree_cfg, Some(&mut sampler))?);
    }
    Ok(ForestModel { trees, features_per_split, seed })
}

/// Majority vote over the trees; a tie predicts 1.
pub fn forest_predict(model: &ForestModel, features: &[f64]) -> Result<u8, ClassifierError> {
    if model.trees.is_empty() {
        return Err(ClassifierError::Training("forest has no trees".into()));
    }
    let mut positive = 0usize;
    for tree in &model.trees {
        positive += usize::from(tree_predict(tree, features)?);
    }
    Ok(u8::from(2 * positive >= model.trees.len()))
}
