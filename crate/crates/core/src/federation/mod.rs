//! Cross-silo federated training.
//!
//! Four screening sites hold rows that never leave them. Each round the
//! coordinator broadcasts shared parameters, every client trains on its
//! own split and answers with updated parameters, and the coordinator
//! merges the answers — by sample-weighted averaging for the linear
//! model, or by collecting everything into a weighted voting ensemble.
//! The only data-derived values that cross a silo boundary are model
//! parameters, per-feature sums used for pooled standardization, and
//! scalar validation accuracies; the closed message schema in [`codec`]
//! is the enforcement point.

mod aggregate;
mod codec;
mod run;
mod transport;
mod types;

pub use aggregate::{compute_global_standardization, fedavg, meta_aggregate};
pub use codec::{
    decode_message, encode_message, Body, Envelope, ProtocolError, PROTOCOL_VERSION,
};
pub use run::{
    run_federation, train_local, ClientDataset, FederationRun, LocalTrainOutcome,
    LOCAL_VALIDATION_FRACTION,
};
pub use transport::{
    read_frame, run_tcp_client, serve_coordinator, write_frame, MAX_FRAME_LEN,
};
pub use types::{
    Aggregation, ClientStats, ClientUpdate, EnsembleMember, GlobalModel, LocalSolver,
    MetaWeighting, RoundConfig, RoundLog,
};

use crate::classifiers::ClassifierError;
use crate::dataset::{DatasetError, SourceId};

/// Everything that can go wrong while federating.
#[derive(Debug, thiserror::Error)]
pub enum FederationError {
    /// The run configuration is internally inconsistent.
    #[error("invalid federation config: {0}")]
    Config(String),
    /// Clients disagree on arity, classifier kind, or shared statistics.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    /// An aggregation step received nothing to aggregate.
    #[error("empty round: {0}")]
    EmptyRound(String),
    /// One client could not complete its local step.
    #[error("client {client_id} failed: {detail}")]
    Client { client_id: SourceId, detail: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("transport: {0}")]
    Transport(#[from] std::io::Error),
}
