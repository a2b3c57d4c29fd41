//! Tabular screening datasets: ingestion, repair, encoding, scoring,
//! and splitting.
//!
//! The working representation is [`Dataset`]: rows of [`Cell`]s under a
//! [`Schema`]. Cells may be missing or textual until
//! [`handle_missing`] and [`label_encode`] have run; after that,
//! [`Dataset::to_prepared`] yields the fully numeric
//! [`PreparedDataset`] the classifiers and federation engine consume.

mod clean;
mod csv_io;
mod encode;
mod qchat;
mod schema;
mod split;
mod table;

pub use clean::{
    deduplicate, deduplicate_counted, handle_missing, handle_missing_counted, MissingPolicy,
    MissingStats,
};
pub use csv_io::{parse_csv, parse_csv_encoded, serialize_csv};
pub use encode::{label_encode, label_encode_union, EncodingMap};
pub use qchat::{qchat_score, QCHAT_FLAG_THRESHOLD};
pub use schema::{Column, ColumnKind, Schema, SourceId, RESPONSE_COLUMNS};
pub use split::{stratified_split, stratified_split_indices};
pub use table::{Cell, Dataset, FeatureMode, PreparedDataset, ScreeningRecord};

use thiserror::Error;

/// Errors from dataset construction and preparation.
#[derive(Debug, Error)]
pub enum DatasetError {
    /// Header or schema shape does not match what the operation needs.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell failed to parse under its column kind.
    #[error("cell error at row {row}, column {column:?}: {detail}")]
    Cell {
        row: usize,
        column: String,
        detail: String,
    },

    /// Mode/median imputation was asked of a column with no observed values.
    #[error("imputation error: column {0:?} has no observed values")]
    Imputation(String),

    /// Stratified splitting needs at least one record of each label.
    #[error("stratification error: {0}")]
    Stratification(String),

    /// A record or cell is not in the fully numeric encoded form.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// An argument was outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("CSV error: {0}")]
    Csv(#[from] ::csv::Error),
}
