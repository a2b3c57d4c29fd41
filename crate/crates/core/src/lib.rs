//! Federated learning for tabular binary screening data.
//!
//! Four data silos hold autism-screening questionnaires (ten binary
//! Q-CHAT-10 responses plus demographics). Each silo trains a local
//! classifier — linear SVC, decision tree, or random forest — and a
//! coordinator combines them into a global model, either by
//! sample-weighted parameter averaging (FedAvg, SVC only) or by a
//! weighted-majority ensemble of the local models. Raw records never
//! leave a silo; only model parameters and aggregate statistics cross
//! the wire.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`dataset`]: CSV ingestion, deduplication, missing-value handling,
//!   label encoding, Q-CHAT scoring, and stratified splits.
//! - [`classifiers`]: from-scratch linear SVC, CART decision tree, and
//!   random forest with deterministic, seeded training.
//! - [`federation`]: client/coordinator round protocol, aggregation,
//!   the JSON wire codec, and a length-prefixed loopback transport.
//! - [`evaluation`]: confusion-matrix metrics, the raw-vs-federated
//!   experiment matrix, and table/JSON rendering.
//! - [`pipeline`]: file-level orchestration shared by the CLI and the
//!   HTTP service (ingest, train-local, federate, report).
//! - [`api`]: request/response bodies and the error envelope of the
//!   HTTP service.
//! - [`synthetic`]: deterministic fixture generator producing four
//!   silo CSVs with complementary score-coverage gaps.

pub mod api;
pub mod classifiers;
pub mod dataset;
pub mod evaluation;
pub mod federation;
pub mod pipeline;
pub mod synthetic;

mod canonical;

pub use canonical::{canonical_json_bytes, canonical_json_string};
