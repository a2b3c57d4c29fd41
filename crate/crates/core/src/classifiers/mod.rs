//! From-scratch binary classifiers with deterministic, seeded training.
//!
//! Three model families cover the screening benchmark: a linear support
//! vector classifier trained by primal subgradient descent, a CART-style
//! decision tree, and a bagged random forest. Training is a pure
//! function of `(data, config, seed)` — no global state, no
//! platform-dependent iteration order — so two runs produce
//! byte-identical serialized parameters.

mod forest;
mod params;
mod svc;
mod tree;

pub use forest::{forest_predict, forest_train, ForestModel};
pub(crate) use svc::sufficient_stats;
pub use params::{ClassifierKind, ForestConfig, ModelParams, SvcConfig, TrainConfig, TreeConfig};
pub use svc::{
    signed_labels, svc_data_loss, svc_full_batch_step, svc_margin, svc_objective, svc_predict,
    svc_run_epochs, svc_subgradient, svc_train, LinearSvcModel, Standardization,
};
pub use tree::{gini, tree_leaf_of, tree_predict, tree_train, tree_train_sampled, TreeModel, TreeNode};

use thiserror::Error;

/// Failure modes shared by the three classifier families.
#[derive(Debug, Error)]
pub enum ClassifierError {
    /// The training set cannot produce a model (empty, single-class,
    /// or an out-of-range hyperparameter).
    #[error("training error: {0}")]
    Training(String),
    /// A feature or intermediate value is NaN or infinite.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Feature arity does not match what the model was trained on.
    #[error("shape error: {0}")]
    Shape(String),
    /// An impurity query over zero samples.
    #[error("degenerate node: {0}")]
    DegenerateNode(String),
}
