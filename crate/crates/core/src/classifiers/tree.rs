//! CART-style decision tree on numeric features with Gini impurity.
//!
//! Splits minimize the summed child impurity nL·gini(L) + nR·gini(R)
//! over candidate thresholds at midpoints of consecutive distinct sorted
//! feature values. Every tie is pinned: equal-quality splits go to the
//! lowest feature index then lowest threshold, and leaf label ties go to
//! 1 (screening-positive). Rows route left when `x[feature] ≤ threshold`.

use serde::{Deserialize, Serialize};

use super::{ClassifierError, TreeConfig};

/// One node in the flat pre-order node array; the root is index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TreeNode {
    Leaf {
        label: u8,
        /// Training rows of each class that reached this leaf.
        class_counts: [u64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A trained decision tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub max_depth: usize,
    pub arity: usize,
}

impl TreeModel {
    /// A tree that is one leaf, mostly useful in tests.
    pub fn single_leaf(label: u8, class_counts: [u64; 2], arity: usize) -> TreeModel {
        TreeModel { nodes: vec![TreeNode::Leaf { label, class_counts }], max_depth: 0, arity }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

/// Gini impurity 1 − p₀² − p₁² of a two-class count pair.
pub fn gini(counts: [u64; 2]) -> Result<f64, ClassifierError> {
    let total = counts[0] + counts[1];
    if total == 0 {
        return Err(ClassifierError::DegenerateNode(
            "impurity of zero samples is undefined".into(),
        ));
    }
    Ok(gini_of(counts))
}

fn gini_of(counts: [u64; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    let p0 = counts[0] as f64 / total;
    let p1 = counts[1] as f64 / total;
    1.0 - p0 * p0 - p1 * p1
}

/// Grow a tree greedily. Stops at purity, `max_depth`, or when no split
/// leaves `min_samples_leaf` rows on both sides.
pub fn tree_train(
    features: &[Vec<f64>],
    labels: &[u8],
    cfg: &TreeConfig,
) -> Result<TreeModel, ClassifierError> {
    tree_train_sampled(features, labels, cfg, None)
}

/// [`tree_train`] with an optional per-node candidate-feature sampler,
/// the hook random forests use. The sampler sees the feature arity and
/// returns the candidate feature indices for one split decision; it is
/// invoked exactly once per node that passes the purity, depth, and
/// size checks, in pre-order node order, so a seeded sampler makes the
/// whole tree deterministic.
pub fn tree_train_sampled(
    features: &[Vec<f64>],
    labels: &[u8],
    cfg: &TreeConfig,
    sampler: Option<&mut dyn FnMut(usize) -> Vec<usize>>,
) -> Result<TreeModel, ClassifierError> {
    let arity = check_tree_inputs(features, labels, cfg)?;
    let mut builder = Builder { x: features, y: labels, cfg, arity, nodes: Vec::new(), sampler };
    let all: Vec<usize> = (0..features.len()).collect();
    builder.grow(&all, 0);
    Ok(TreeModel { nodes: builder.nodes, max_depth: cfg.max_depth, arity })
}

/// Route one row to a leaf and return its label.
pub fn tree_predict(model: &TreeModel, features: &[f64]) -> Result<u8, ClassifierError> {
    Ok(tree_leaf_of(model, features)?.0)
}

/// Route one row to a leaf; returns (label, class_counts) of that leaf.
pub fn tree_leaf_of(model: &TreeModel, features: &[f64]) -> Result<(u8, [u64; 2]), ClassifierError> {
    if features.len() != model.arity {
        return Err(ClassifierError::Shape(format!(
            "expected {} features, got {}",
            model.arity,
            features.len()
        )));
    }
    let mut idx = 0;
    loop {
        match &model.nodes[idx] {
            TreeNode::Leaf { label, class_counts } => return Ok((*label, *class_counts)),
            TreeNode::Split { feature, threshold, left, right } => {
                idx = if features[*feature] <= *threshold { *left } else { *right };
            }
        }
    }
}

struct Builder<'a, 'b> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    cfg: &'a TreeConfig,
    arity: usize,
    nodes: Vec<TreeNode>,
    sampler: Option<&'b mut dyn FnMut(usize) -> Vec<usize>>,
}

impl Builder<'_, '_> {
    /// Append the subtree over `rows` and return its root index.
    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let counts = label_counts(self.y, rows);
        let splittable = counts[0] > 0
            && counts[1] > 0
            && depth < self.cfg.max_depth
            && rows.len() >= 2 * self.cfg.min_samples_leaf;
        let split = if splittable { self.best_split(rows) } else { None };
        match split {
            None => {
                self.nodes.push(TreeNode::Leaf { label: majority(counts), class_counts: counts });
                self.nodes.len() - 1
            }
            Some((feature, threshold)) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.x[i][feature] <= threshold);
                let slot = self.nodes.len();
                // reserve the slot so children land after their parent
                self.nodes.push(TreeNode::Split { feature, threshold, left: 0, right: 0 });
                let left = self.grow(&left_rows, depth + 1);
                let right = self.grow(&right_rows, depth + 1);
                self.nodes[slot] = TreeNode::Split { feature, threshold, left, right };
                slot
            }
        }
    }

    /// Lowest-score valid split, or None when no threshold keeps
    /// `min_samples_leaf` rows on both sides. Scanning features and
    /// thresholds in ascending order with a strict `<` comparison makes
    /// the tie-break (lowest feature, then lowest threshold) fall out of
    /// the scan order.
    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let candidates: Vec<usize> = match &mut self.sampler {
            Some(pick) => {
                let mut picked = pick(self.arity);
                picked.sort_unstable();
                picked.dedup();
                picked.retain(|&f| f < self.arity);
                picked
            }
            None => (0..self.arity).collect(),
        };
        let total = label_counts(self.y, rows);
        let n = rows.len() as u64;
        let min_leaf = self.cfg.min_samples_leaf as u64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
        for feature in candidates {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.x[i][feature], self.y[i])));
            sorted.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("features are finite"));
            let mut left = [0u64; 2];
            for k in 0..sorted.len() - 1 {
                left[usize::from(sorted[k].1)] += 1;
                let (a, b) = (sorted[k].0, sorted[k + 1].0);
                if a >= b {
                    continue; // same value: no boundary here
                }
                let n_left = k as u64 + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                // Midpoint can round up onto `b` for adjacent floats; use
                // `a` then so the `≤ threshold` routing still cuts here.
                let mut threshold = (a + b) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let score = n_left as f64 * gini_of(left) + n_right as f64 * gini_of(right);
                if best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, feature, threshold));
                }
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }
}

fn label_counts(y: &[u8], rows: &[usize]) -> [u64; 2] {
    let mut counts = [0u64; 2];
    for &i in rows {
        counts[usize::from(y[i])] += 1;
    }
    counts
}

/// Majority label with the tie going to 1.
fn majority(counts: [u64; 2]) -> u8 {
    u8::from(counts[1] >= counts[0])
}

fn check_tree_inputs(
    features: &[Vec<f64>],
    labels: &[u8],
    cfg: &TreeConfig,
) -> Result<usize, ClassifierError> {
    let Some(first) = features.first() else {
        return Err(ClassifierError::Training("empty training set".into()));
    };
    let arity = first.len();
    if arity == 0 {
        return Err(ClassifierError::Shape("rows must have at least one feature".into()));
    }
    if labels.len() != features.len() {
        return Err(ClassifierError::Shape(format!(
            "{} rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    for (i, row) in features.iter().enumerate() {
        if row.len() != arity {
            return Err(ClassifierError::Shape(format!(
                "row {i} has {} features, expected {arity}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(ClassifierError::Numeric(format!(
                "non-finite feature at row {i}, column {j}"
            )));
        }
    }
    if let Some(i) = labels.iter().position(|&l| l > 1) {
        return Err(ClassifierError::Training(format!(
            "label at row {i} is {}, expected 0 or 1",
            labels[i]
        )));
    }
    if cfg.min_samples_leaf == 0 {
        return Err(ClassifierError::Training("min_samples_leaf must be at least 1".into()));
    }
    Ok(arity)
}
