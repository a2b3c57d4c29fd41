//! Confusion counts and the scalar metrics derived from them.
//!
//! The positive class is label 1 throughout. Any ratio whose denominator
//! is zero is reported as 0.0 and its name is recorded in the
//! degeneracy list, so downstream consumers can tell a genuine zero
//! from an undefined one.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Standard binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Predicted 1, truly 1.
    pub tp: u64,
    /// Predicted 1, truly 0.
    pub fp: u64,
    /// Predicted 0, truly 1.
    pub r#fn: u64,
    /// Predicted 0, truly 0.
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.r#fn + self.tn
    }

    /// The same predictions scored with the opposite positive-class
    /// convention: true/false positives trade places with their
    /// negative counterparts.
    pub fn swap_classes(&self) -> ConfusionMatrix {
        ConfusionMatrix { tp: self.tn, fp: self.r#fn, r#fn: self.fp, tn: self.tp }
    }
}

/// Count one prediction/truth pair per row.
pub fn confusion(predictions: &[u8], truth: &[u8]) -> Result<ConfusionMatrix, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::Shape(format!(
            "{} predictions against {} truth labels",
            predictions.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (i, (&p, &t)) in predictions.iter().zip(truth).enumerate() {
        match (p, t) {
            (1, 1) => cm.tp += 1,
            (1, 0) => cm.fp += 1,
            (0, 1) => cm.r#fn += 1,
            (0, 0) => cm.tn += 1,
            _ => {
                return Err(EvalError::Shape(format!(
                    "labels must be 0 or 1; row {i} has prediction {p}, truth {t}"
                )))
            }
        }
    }
    Ok(cm)
}

/// The scalar metrics of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// Harmonic mean of precision and recall for the positive class.
    pub f1_positive: f64,
    /// Support-weighted mean of the per-class F1 scores.
    pub f1_weighted: f64,
    /// Metrics whose denominator was zero and were reported as 0.0.
    pub degenerate: Vec<String>,
}

/// A ratio that is 0.0 with a note when its denominator vanishes.
struct Flagged<'a> {
    degenerate: &'a mut Vec<String>,
}

impl Flagged<'_> {
    fn ratio(&mut self, name: &str, numerator: f64, denominator: f64) -> f64 {
        if denominator == 0.0 {
            if !self.degenerate.iter().any(|d| d == name) {
                self.degenerate.push(name.to_string());
            }
            0.0
        } else {
            numerator / denominator
        }
    }
}

/// Derive all metrics from one confusion matrix.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::Empty("confusion matrix counts no records".into()));
    }
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.r#fn as f64, cm.tn as f64);
    let mut degenerate = Vec::new();
    let mut f = Flagged { degenerate: &mut degenerate };

    let accuracy = (tp + tn) / total as f64;
    let precision = f.ratio("precision", tp, tp + fp);
    let recall = f.ratio("recall", tp, tp + fn_);
    let f1_positive = f.ratio("f1_positive", 2.0 * precision * recall, precision + recall);

    // Per-class F1 weighted by true support; the negative class reuses
    // the same formulas with the class convention swapped.
    let precision_neg = f.ratio("f1_weighted", tn, tn + fn_);
    let recall_neg = f.ratio("f1_weighted", tn, tn + fp);
    let f1_negative =
        f.ratio("f1_weighted", 2.0 * precision_neg * recall_neg, precision_neg + recall_neg);
    let support_pos = tp + fn_;
    let support_neg = tn + fp;
    let f1_weighted = (support_pos * f1_positive + support_neg * f1_negative) / total as f64;

    Ok(Metrics { accuracy, precision, recall, f1_positive, f1_weighted, degenerate })
}
