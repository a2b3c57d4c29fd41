//! Model parameter container and training hyperparameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::forest::ForestModel;
use super::svc::LinearSvcModel;
use super::tree::TreeModel;

/// Which classifier family an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    Svc,
    Dt,
    Rf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Svc, ClassifierKind::Dt, ClassifierKind::Rf];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svc => "svc",
            ClassifierKind::Dt => "dt",
            ClassifierKind::Rf => "rf",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svc" => Ok(ClassifierKind::Svc),
            "dt" => Ok(ClassifierKind::Dt),
            "rf" => Ok(ClassifierKind::Rf),
            other => Err(format!("unknown classifier kind `{other}` (expected svc, dt, or rf)")),
        }
    }
}

/// Serialized parameters of any trained model. This is the payload that
/// crosses the federation wire and lands in model files, so it carries
/// its own kind tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum ModelParams {
    Svc(LinearSvcModel),
    Dt(TreeModel),
    Rf(ForestModel),
}

impl ModelParams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ModelParams::Svc(_) => ClassifierKind::Svc,
            ModelParams::Dt(_) => ClassifierKind::Dt,
            ModelParams::Rf(_) => ClassifierKind::Rf,
        }
    }

    /// Feature arity the parameters were trained on.
    pub fn arity(&self) -> usize {
        match self {
            ModelParams::Svc(m) => m.weights.len(),
            ModelParams::Dt(m) => m.arity,
            ModelParams::Rf(m) => m.arity(),
        }
    }

    /// Classify one raw feature row with whichever model these are.
    pub fn predict(&self, features: &[f64]) -> Result<u8, super::ClassifierError> {
        match self {
            ModelParams::Svc(m) => super::svc_predict(m, features),
            ModelParams::Dt(m) => super::tree_predict(m, features),
            ModelParams::Rf(m) => super::forest_predict(m, features),
        }
    }
}

/// Linear SVC hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvcConfig {
    /// Hinge-loss weight C in J(w,b) = ½‖w‖² + C·Σ hinge.
    pub c: f64,
    /// Full passes over the training order.
    pub epochs: usize,
}

impl Default for SvcConfig {
    fn default() -> Self {
        SvcConfig { c: 1.0, epochs: 200 }
    }
}

/// Decision-tree hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    /// Maximum split depth; 0 builds a single leaf.
    pub max_depth: usize,
    /// Minimum samples each child of a split must keep.
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 8, min_samples_leaf: 2 }
    }
}

/// Random-forest hyperparameters; trees themselves use [`TreeConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features drawn per split; `None` means ⌈√arity⌉.
    pub features_per_split: Option<usize>,
    /// Test hook: `false` replaces bootstrap resampling with identity so
    /// a one-tree forest reduces to a plain tree.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 100, features_per_split: None, bootstrap: true }
    }
}

/// Everything needed to train any of the three families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub classifier_kind: ClassifierKind,
    pub svc: SvcConfig,
    pub dt: TreeConfig,
    pub rf: ForestConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            classifier_kind: ClassifierKind::Svc,
            svc: SvcConfig::default(),
            dt: TreeConfig::default(),
            rf: ForestConfig::default(),
            seed: 42,
        }
    }
}
