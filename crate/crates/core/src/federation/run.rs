//! The federation runtime: per-client local training state and the
//! coordinator loop.
//!
//! The coordinator is written once, against the [`ClientLink`] trait;
//! the in-process simulator and the TCP transport are just two link
//! implementations. Every message crosses the wire codec either way and
//! lands in a transcript, so a run certifies that the frame format
//! carries everything the protocol needs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifiers::{
    forest_train, signed_labels, sufficient_stats, svc_data_loss, svc_full_batch_step,
    svc_run_epochs, svc_train, tree_train, LinearSvcModel, ModelParams, SvcConfig,
};
use crate::dataset::{stratified_split_indices, FeatureMode, PreparedDataset, SourceId};

use super::aggregate::{compute_global_standardization, fedavg, meta_aggregate};
use super::codec::{decode_message, encode_message, Body, Envelope};
use super::types::{
    Aggregation, ClientStats, ClientUpdate, GlobalModel, LocalSolver, RoundConfig, RoundLog,
};
use super::FederationError;

/// Fraction of each silo held out locally for validation accuracy.
pub const LOCAL_VALIDATION_FRACTION: f64 = 0.2;

/// One silo's encoded rows, ready to participate in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientDataset {
    pub client_id: SourceId,
    /// Raw (unstandardized) numeric feature rows.
    pub features: Vec<Vec<f64>>,
    /// Binary labels aligned with `features`.
    pub labels: Vec<u8>,
}

impl ClientDataset {
    pub fn from_prepared(data: &PreparedDataset, mode: FeatureMode) -> ClientDataset {
        ClientDataset {
            client_id: data.source_id,
            features: data.feature_matrix(mode),
            labels: data.labels(),
        }
    }
}

/// Result of training one silo on its own.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LocalTrainOutcome {
    pub client_id: SourceId,
    pub params: ModelParams,
    /// Rows in the local training split the model was fit on.
    pub n_train: u64,
    /// Accuracy on the local held-out split (0.0 when it is empty).
    pub validation_accuracy: f64,
}

/// Everything a finished run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct FederationRun {
    pub global: GlobalModel,
    pub rounds: Vec<RoundLog>,
    /// Every protocol frame of the run, in exchange order, as encoded.
    pub transcript: Vec<Vec<u8>>,
}

/// One client's private state: its data split, fixed sample order, and
/// the sufficient statistics it registers with.
pub(crate) struct ClientState {
    client_id: SourceId,
    train_features: Vec<Vec<f64>>,
    train_labels: Vec<u8>,
    val_features: Vec<Vec<f64>>,
    val_labels: Vec<u8>,
    /// Signed (−1/+1) training labels.
    y: Vec<f64>,
    /// The one seeded permutation; fixed for the whole run so chained
    /// rounds retrace a single uninterrupted optimization.
    order: Vec<usize>,
    rng_seed: u64,
    stats: ClientStats,
}

impl ClientState {
    /// Split the silo 80/20, derive its seed from its rank in the
    /// client-id order, and precompute everything round handling needs.
    pub(crate) fn new(
        data: ClientDataset,
        cfg: &RoundConfig,
        client_rank: usize,
    ) -> Result<ClientState, FederationError> {
        let client_id = data.client_id;
        let fail = |detail: String| FederationError::Client { client_id, detail };
        if data.features.len() != data.labels.len() {
            return Err(fail(format!(
                "{} feature rows but {} labels",
                data.features.len(),
                data.labels.len()
            )));
        }
        let arity = data.features.first().map_or(0, Vec::len);
        if arity == 0 {
            return Err(fail("no feature columns".into()));
        }
        if data.features.iter().any(|r| r.len() != arity) {
            return Err(fail("ragged feature rows".into()));
        }

        let rng_seed = cfg.seed.wrapping_add(client_rank as u64);
        let (train_idx, val_idx) =
            stratified_split_indices(&data.labels, LOCAL_VALIDATION_FRACTION, rng_seed)?;
        let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>) {
            (
                idx.iter().map(|&i| data.features[i].clone()).collect(),
                idx.iter().map(|&i| data.labels[i]).collect(),
            )
        };
        let (train_features, train_labels) = pick(&train_idx);
        let (val_features, val_labels) = pick(&val_idx);

        // Same permutation construction as training-from-scratch uses, so
        // a single-client run is bit-for-bit the same optimization.
        let mut order: Vec<usize> = (0..train_features.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));

        let (count, sums, sumsqs) =
            sufficient_stats(&train_features).map_err(|e| fail(e.to_string()))?;
        let y = signed_labels(&train_labels);
        Ok(ClientState {
            client_id,
            train_features,
            train_labels,
            val_features,
            val_labels,
            y,
            order,
            rng_seed,
            stats: ClientStats { count, sums, sumsqs },
        })
    }

    pub(crate) fn n_train(&self) -> u64 {
        self.train_features.len() as u64
    }

    /// The registration message opening the client's participation.
    pub(crate) fn register_envelope(&self) -> Envelope {
        Envelope::new(
            0,
            Body::Register {
                client_id: self.client_id,
                n_samples: self.n_train(),
                stats: self.stats.clone(),
            },
        )
    }

    /// React to one broadcast: run the local step for this round and
    /// answer with a [`ClientUpdate`].
    pub(crate) fn handle_broadcast(
        &self,
        round_index: u64,
        params: Option<&ModelParams>,
        cfg: &RoundConfig,
    ) -> Result<ClientUpdate, FederationError> {
        let params = match cfg.aggregation {
            Aggregation::Fedavg => self.fedavg_step(round_index, params, cfg)?,
            Aggregation::MetaVote => self.train_own_model(cfg)?,
        };
        let local_validation_accuracy = self.validation_accuracy(&params)?;
        Ok(ClientUpdate {
            client_id: self.client_id,
            params,
            n_samples: self.n_train(),
            local_validation_accuracy,
        })
    }

    /// Continue the global SVC from the broadcast parameters: standardize
    /// with the coordinator's statistics, then run this round's local
    /// epochs with the step counter resuming where the previous round's
    /// left off.
    fn fedavg_step(
        &self,
        round_index: u64,
        params: Option<&ModelParams>,
        cfg: &RoundConfig,
    ) -> Result<ModelParams, FederationError> {
        let Some(ModelParams::Svc(global)) = params else {
            return Err(FederationError::SchemaMismatch(format!(
                "fedavg broadcast to {} must carry svc parameters",
                self.client_id
            )));
        };
        let arity = self.train_features[0].len();
        if global.weights.len() != arity {
            return Err(FederationError::SchemaMismatch(format!(
                "broadcast arity {} but {} has {arity} features",
                global.weights.len(),
                self.client_id
            )));
        }
        if round_index == 0 {
            return Err(FederationError::SchemaMismatch(
                "broadcast rounds are numbered from 1".into(),
            ));
        }
        let z = global.standardization().apply(&self.train_features);
        let mut weights = global.weights.clone();
        let mut bias = global.bias;
        // The broadcast model is authoritative for C; epochs come from
        // the round schedule.
        let svc_cfg = SvcConfig { c: global.regularization_c, epochs: cfg.local_epochs_per_round };
        match cfg.solver {
            LocalSolver::EpochSgd => {
                let t_offset =
                    (round_index - 1) * cfg.local_epochs_per_round as u64 * self.n_train();
                svc_run_epochs(
                    &z,
                    &self.y,
                    &mut weights,
                    &mut bias,
                    &svc_cfg,
                    &self.order,
                    t_offset,
                    cfg.local_epochs_per_round,
                )
                .map_err(|e| self.training_error(e))?;
            }
            LocalSolver::FullBatchStep { eta } => {
                svc_full_batch_step(&z, &self.y, &mut weights, &mut bias, svc_cfg.c, eta)
                    .map_err(|e| self.training_error(e))?;
            }
        }
        Ok(ModelParams::Svc(LinearSvcModel {
            weights,
            bias,
            regularization_c: global.regularization_c,
            feature_means: global.feature_means.clone(),
            feature_scales: global.feature_scales.clone(),
        }))
    }

    /// Train this silo's own classifier to completion (the ensemble
    /// path; nothing global is consumed).
    fn train_own_model(&self, cfg: &RoundConfig) -> Result<ModelParams, FederationError> {
        use crate::classifiers::ClassifierKind::*;
        let params = match cfg.classifier_kind {
            Svc => ModelParams::Svc(
                svc_train(&self.train_features, &self.train_labels, &cfg.svc, self.rng_seed)
                    .map_err(|e| self.training_error(e))?,
            ),
            Dt => ModelParams::Dt(
                tree_train(&self.train_features, &self.train_labels, &cfg.dt)
                    .map_err(|e| self.training_error(e))?,
            ),
            Rf => ModelParams::Rf(
                forest_train(
                    &self.train_features,
                    &self.train_labels,
                    &cfg.dt,
                    &cfg.rf,
                    self.rng_seed,
                )
                .map_err(|e| self.training_error(e))?,
            ),
        };
        Ok(params)
    }

    /// Accuracy of `params` on the local held-out rows; an empty
    /// held-out split scores 0.0 rather than failing the round.
    fn validation_accuracy(&self, params: &ModelParams) -> Result<f64, FederationError> {
        if self.val_labels.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for (row, &label) in self.val_features.iter().zip(&self.val_labels) {
            if params.predict(row).map_err(|e| self.training_error(e))? == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / self.val_labels.len() as f64)
    }

    /// Hinge sum of `model` over this client's training rows (no C, no
    /// regularizer) — this client's share of the pooled objective.
    fn data_loss(&self, model: &LinearSvcModel) -> f64 {
        let z = model.standardization().apply(&self.train_features);
        svc_data_loss(&z, &self.y, &model.weights, model.bias)
    }

    fn training_error(&self, e: crate::classifiers::ClassifierError) -> FederationError {
        FederationError::Client { client_id: self.client_id, detail: e.to_string() }
    }
}

/// The coordinator's view of one connected client. Implementations move
/// encoded frames; the coordinator never sees client internals.
pub(crate) trait ClientLink {
    /// Wait for the client's opening registration frame.
    fn recv_register(&mut self) -> Result<Vec<u8>, FederationError>;
    /// Deliver a broadcast frame and wait for the update frame.
    fn round_trip(&mut self, broadcast: &[u8]) -> Result<Vec<u8>, FederationError>;
    /// Deliver the completion frame.
    fn finish(&mut self, complete: &[u8]) -> Result<(), FederationError>;
    /// This client's hinge-loss share of the pooled objective, when the
    /// runtime can see the data. Only the in-process simulator can; a
    /// live transport answers `None` and the round log records no
    /// objective.
    fn data_loss(&self, model: &LinearSvcModel) -> Option<f64>;
}

/// Link to a client simulated in this process.
struct InProcessLink {
    state: ClientState,
    cfg: RoundConfig,
}

impl ClientLink for InProcessLink {
    fn recv_register(&mut self) -> Result<Vec<u8>, FederationError> {
        Ok(encode_message(&self.state.register_envelope()))
    }

    fn round_trip(&mut self, broadcast: &[u8]) -> Result<Vec<u8>, FederationError> {
        let envelope = decode_message(broadcast)?;
        let Body::Broadcast { params } = envelope.body else {
            return Err(FederationError::SchemaMismatch(
                "client expected a broadcast frame".into(),
            ));
        };
        let update =
            self.state.handle_broadcast(envelope.round_index, params.as_ref(), &self.cfg)?;
        Ok(encode_message(&Envelope::new(envelope.round_index, Body::Update(update))))
    }

    fn finish(&mut self, complete: &[u8]) -> Result<(), FederationError> {
        decode_message(complete)?;
        Ok(())
    }

    fn data_loss(&self, model: &LinearSvcModel) -> Option<f64> {
        Some(self.state.data_loss(model))
    }
}

/// A client that completed registration: its id, stats, the raw
/// register frame (kept for the transcript), and the live link.
type RegisteredClient = (SourceId, ClientStats, Vec<u8>, Box<dyn ClientLink>);

/// Run the whole protocol over any set of links. Links are reordered by
/// their registered client id, so arrival order never matters.
pub(crate) fn drive_coordinator(
    links: Vec<Box<dyn ClientLink>>,
    cfg: &RoundConfig,
) -> Result<FederationRun, FederationError> {
    cfg.validate()?;
    if links.is_empty() {
        return Err(FederationError::EmptyRound("no clients to federate".into()));
    }

    // Registration: collect ids, sizes, and standardization stats.
    let mut joined: Vec<RegisteredClient> = Vec::new();
    for mut link in links {
        let frame = link.recv_register()?;
        let envelope = decode_message(&frame)?;
        let Body::Register { client_id, stats, .. } = envelope.body else {
            return Err(FederationError::SchemaMismatch(
                "client must open with a register frame".into(),
            ));
        };
        if joined.iter().any(|(id, ..)| *id == client_id) {
            return Err(FederationError::Config(format!(
                "client id {client_id} appears twice"
            )));
        }
        joined.push((client_id, stats, frame, link));
    }
    joined.sort_by_key(|(id, ..)| *id);

    let mut transcript: Vec<Vec<u8>> = Vec::with_capacity(2 * joined.len() + 1);
    let registered: Vec<(SourceId, ClientStats)> = joined
        .iter()
        .map(|(id, stats, frame, _)| {
            transcript.push(frame.clone());
            (*id, stats.clone())
        })
        .collect();
    let mut links: Vec<(SourceId, Box<dyn ClientLink>)> =
        joined.into_iter().map(|(id, _, _, link)| (id, link)).collect();

    // The averaging path starts every client from one shared zero model
    // standardized by the pooled statistics; the ensemble path sends no
    // parameters down.
    let mut current_svc: Option<LinearSvcModel> = match cfg.aggregation {
        Aggregation::Fedavg => {
            let std = compute_global_standardization(&registered)?;
            Some(LinearSvcModel {
                weights: vec![0.0; std.means.len()],
                bias: 0.0,
                regularization_c: cfg.svc.c,
                feature_means: std.means,
                feature_scales: std.scales,
            })
        }
        Aggregation::MetaVote => None,
    };

    // Ensemble members train to completion, so one round decides.
    let total_rounds = match cfg.aggregation {
        Aggregation::Fedavg => cfg.n_rounds,
        Aggregation::MetaVote => 1,
    };

    let mut rounds: Vec<RoundLog> = Vec::with_capacity(total_rounds);
    let mut global: Option<GlobalModel> = None;
    for round in 1..=total_rounds {
        let broadcast = encode_message(&Envelope::new(
            round as u64,
            Body::Broadcast { params: current_svc.clone().map(ModelParams::Svc) },
        ));
        let mut updates: Vec<ClientUpdate> = Vec::with_capacity(links.len());
        for (id, link) in &mut links {
            transcript.push(broadcast.clone());
            let reply = link.round_trip(&broadcast)?;
            let envelope = decode_message(&reply)?;
            transcript.push(reply);
            let Body::Update(update) = envelope.body else {
                return Err(FederationError::SchemaMismatch(format!(
                    "client {id} answered a broadcast with a non-update frame"
                )));
            };
            if envelope.round_index != round as u64 || update.client_id != *id {
                return Err(FederationError::SchemaMismatch(format!(
                    "client {id} replied as {} for round {} during round {round}",
                    update.client_id, envelope.round_index
                )));
            }
            updates.push(update);
        }

        let client_validation_accuracy: BTreeMap<SourceId, f64> = updates
            .iter()
            .map(|u| (u.client_id, u.local_validation_accuracy))
            .collect();
        let (next_global, global_objective) = match cfg.aggregation {
            Aggregation::Fedavg => {
                let model = fedavg(&updates)?;
                // Diagnostic: the pooled objective ½‖w‖² + C·Σ hinge over
                // every client's training rows, accumulated in client
                // order; None as soon as any link cannot evaluate it.
                let loss: Option<f64> =
                    links.iter().map(|(_, link)| link.data_loss(&model)).sum();
                let objective = loss.map(|l| {
                    0.5 * model.weights.iter().map(|w| w * w).sum::<f64>()
                        + model.regularization_c * l
                });
                current_svc = Some(model.clone());
                (GlobalModel::Fedavg { model }, objective)
            }
            Aggregation::MetaVote => (meta_aggregate(&updates, cfg.meta_weighting)?, None),
        };
        rounds.push(RoundLog { round, client_validation_accuracy, global_objective });
        global = Some(next_global);
    }

    let global = global.expect("at least one round ran");
    let complete = encode_message(&Envelope::new(
        total_rounds as u64,
        Body::Complete { global: global.clone() },
    ));
    transcript.push(complete.clone());
    for (_, link) in &mut links {
        link.finish(&complete)?;
    }
    Ok(FederationRun { global, rounds, transcript })
}

/// Run a whole federation in process, routing every message through the
/// wire codec.
pub fn run_federation(
    clients: Vec<ClientDataset>,
    cfg: &RoundConfig,
) -> Result<FederationRun, FederationError> {
    cfg.validate()?;
    let mut clients = clients;
    clients.sort_by_key(|c| c.client_id);
    let mut links: Vec<Box<dyn ClientLink>> = Vec::with_capacity(clients.len());
    for (rank, data) in clients.into_iter().enumerate() {
        links.push(Box::new(InProcessLink {
            state: ClientState::new(data, cfg, rank)?,
            cfg: cfg.clone(),
        }));
    }
    drive_coordinator(links, cfg)
}

/// Train one silo by itself — the "local only" baseline.
///
/// The silo is split exactly as a federation client ranked first would
/// be, and an SVC gets `n_rounds × local_epochs_per_round` epochs, so a
/// one-client averaging run and this function produce bit-identical
/// models.
pub fn train_local(
    data: ClientDataset,
    cfg: &RoundConfig,
) -> Result<LocalTrainOutcome, FederationError> {
    cfg.validate()?;
    let state = ClientState::new(data, cfg, 0)?;
    use crate::classifiers::ClassifierKind::*;
    let params = match cfg.classifier_kind {
        Svc => {
            let svc_cfg =
                SvcConfig { c: cfg.svc.c, epochs: cfg.n_rounds * cfg.local_epochs_per_round };
            ModelParams::Svc(
                svc_train(&state.train_features, &state.train_labels, &svc_cfg, state.rng_seed)
                    .map_err(|e| state.training_error(e))?,
            )
        }
        Dt | Rf => state.train_own_model(cfg)?,
    };
    let validation_accuracy = state.validation_accuracy(&params)?;
    Ok(LocalTrainOutcome {
        client_id: state.client_id,
        params,
        n_train: state.n_train(),
        validation_accuracy,
    })
}
