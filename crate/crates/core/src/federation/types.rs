//! Value types shared by the coordinator, clients, and the wire codec.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifiers::{
    svc_predict, ClassifierKind, ForestConfig, LinearSvcModel, ModelParams, SvcConfig, TreeConfig,
};
use crate::dataset::{FeatureMode, SourceId};

use super::FederationError;

/// How client models become one global model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Sample-count-weighted parameter averaging; SVC only.
    Fedavg,
    /// Server-side weighted-majority ensemble of the local models.
    MetaVote,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Fedavg => "fedavg",
            Aggregation::MetaVote => "meta-vote",
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fedavg" => Ok(Aggregation::Fedavg),
            "meta-vote" => Ok(Aggregation::MetaVote),
            other => Err(format!("unknown aggregation `{other}` (expected fedavg or meta-vote)")),
        }
    }
}

/// How ensemble vote weights are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetaWeighting {
    /// Proportional to each client's training-sample count (default,
    /// matching the averaging convention).
    #[default]
    NSamples,
    /// Proportional to each client's held-out validation accuracy.
    ValidationAccuracy,
}

/// Local optimization mode for fedavg rounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum LocalSolver {
    /// Epoch-ordered subgradient descent (production path).
    #[default]
    EpochSgd,
    /// Test hook: exactly one full-batch subgradient step with a fixed
    /// learning rate, whose average across shards equals the
    /// centralized step.
    FullBatchStep { eta: f64 },
}

/// Per-client sufficient statistics for pooled standardization; the
/// only data-derived numbers that leave a silo besides model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientStats {
    pub count: u64,
    pub sums: Vec<f64>,
    pub sumsqs: Vec<f64>,
}

/// What one client sends back after local training in a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientUpdate {
    pub client_id: SourceId,
    pub params: ModelParams,
    /// Size of the client's local training split.
    pub n_samples: u64,
    /// Accuracy on the client's deterministic 20% held-out split.
    pub local_validation_accuracy: f64,
}

/// Full configuration of a federation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoundConfig {
    pub classifier_kind: ClassifierKind,
    pub aggregation: Aggregation,
    pub n_rounds: usize,
    pub local_epochs_per_round: usize,
    pub seed: u64,
    pub feature_mode: FeatureMode,
    pub meta_weighting: MetaWeighting,
    pub solver: LocalSolver,
    pub svc: SvcConfig,
    pub dt: TreeConfig,
    pub rf: ForestConfig,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            classifier_kind: ClassifierKind::Svc,
            aggregation: Aggregation::Fedavg,
            n_rounds: 10,
            local_epochs_per_round: 20,
            seed: 42,
            feature_mode: FeatureMode::default(),
            meta_weighting: MetaWeighting::default(),
            solver: LocalSolver::default(),
            svc: SvcConfig::default(),
            dt: TreeConfig::default(),
            rf: ForestConfig::default(),
        }
    }
}

impl RoundConfig {
    /// Reject combinations the protocol cannot execute.
    pub fn validate(&self) -> Result<(), FederationError> {
        if self.n_rounds == 0 {
            return Err(FederationError::Config("n_rounds must be at least 1".into()));
        }
        if self.aggregation == Aggregation::Fedavg && self.classifier_kind != ClassifierKind::Svc {
            return Err(FederationError::Config(format!(
                "fedavg can only average svc parameters, not {}",
                self.classifier_kind
            )));
        }
        Ok(())
    }
}

/// One ensemble member with its normalized vote weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub params: ModelParams,
    pub vote_weight: f64,
}

/// The coordinator's output model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "aggregation", rename_all = "kebab-case")]
pub enum GlobalModel {
    Fedavg { model: LinearSvcModel },
    MetaVote { members: Vec<EnsembleMember> },
}

impl GlobalModel {
    /// Predict one row; ensemble ties go to label 1.
    pub fn predict(&self, features: &[f64]) -> Result<u8, FederationError> {
        match self {
            GlobalModel::Fedavg { model } => Ok(svc_predict(model, features)?),
            GlobalModel::MetaVote { members } => {
                if members.is_empty() {
                    return Err(FederationError::EmptyRound("ensemble has no members".into()));
                }
                let mut positive = 0.0;
                let mut total = 0.0;
                for member in members {
                    let vote = member.params.predict(features)?;
                    total += member.vote_weight;
                    if vote == 1 {
                        positive += member.vote_weight;
                    }
                }
                Ok(u8::from(positive >= total - positive))
            }
        }
    }
}

/// One line of the per-round log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    /// 1-based round number.
    pub round: usize,
    /// Held-out accuracy per client, keyed by source id.
    pub client_validation_accuracy: BTreeMap<SourceId, f64>,
    /// Training objective of the aggregated model over all clients'
    /// training data; only the in-process simulator computes it (the
    /// live transport would need an extra evaluation leg).
    pub global_objective: Option<f64>,
}
