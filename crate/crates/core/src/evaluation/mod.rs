//! Scoring and comparison of the training conditions.
//!
//! One note on the two F1 columns: the published raw-baseline rows are
//! not consistent with F1 as the harmonic mean of their own precision
//! and recall (85% and 15% harmonic-mean to ≈25%, not 75%), but they are
//! close to a support-weighted per-class F1. Reports therefore carry
//! both `f1_positive` (harmonic mean for the positive class) and
//! `f1_weighted` (support-weighted across classes), and the table's
//! `Fs` column renders the weighted variant.

mod experiment;
mod metrics;
mod render;

pub use experiment::{
    run_experiment_matrix, Condition, ExperimentCell, ExperimentPlan, MetricsReport,
    SPLIT_SEED, TEST_FRACTION,
};
pub use metrics::{confusion, metrics, ConfusionMatrix, Metrics};
pub use render::{
    method_label, parse_reports, percent, reference_table_rows, render_json, render_rows,
    render_table, table_rows, TableRow,
};

use crate::classifiers::{ClassifierError, ClassifierKind};
use crate::dataset::DatasetError;
use crate::federation::FederationError;

/// Everything that can go wrong while evaluating.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    /// Inputs whose dimensions or label domain do not line up.
    #[error("shape: {0}")]
    Shape(String),
    /// Nothing to evaluate.
    #[error("empty evaluation: {0}")]
    Empty(String),
    /// The experiment inputs cannot form a matrix.
    #[error("invalid experiment input: {0}")]
    Input(String),
    /// A report payload that does not parse back.
    #[error("unparseable report payload: {0}")]
    Parse(String),
    /// A cell failed; coordinates identify which.
    #[error("cell {condition}/{classifier_kind} failed: {detail}")]
    Cell { condition: Condition, classifier_kind: ClassifierKind, detail: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Federation(#[from] FederationError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}
