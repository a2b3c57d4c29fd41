//! Request and response bodies for the HTTP service.
//!
//! The service and its client crate both depend on these types, so the
//! two sides cannot drift apart. Errors travel as an [`ErrorEnvelope`]
//! whose [`ErrorCode`] fixes both the HTTP status and the CLI exit
//! code.

use serde::{Deserialize, Serialize};

use crate::dataset::SourceId;
use crate::evaluation::{Metrics, MetricsReport};
use crate::federation::{GlobalModel, LocalTrainOutcome, RoundLog};
use crate::pipeline::{IngestReport, MatrixScope, PipelineError, RunConfig};

/// Error class shared by the HTTP service and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    Config,
    Data,
    Training,
    Artifact,
    Internal,
}

impl ErrorCode {
    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::Config => 400,
            ErrorCode::Data | ErrorCode::Training => 422,
            ErrorCode::Artifact => 404,
            ErrorCode::Internal => 500,
        }
    }

    /// Process exit code: 2 for usage/config/data problems, 3 for
    /// training failures, 4 for missing artifacts, 1 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Config | ErrorCode::Data => 2,
            ErrorCode::Training => 3,
            ErrorCode::Artifact => 4,
            ErrorCode::Internal => 1,
        }
    }
}

impl From<&PipelineError> for ErrorCode {
    fn from(e: &PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => ErrorCode::Config,
            PipelineError::Data(_) => ErrorCode::Data,
            PipelineError::Training(_) => ErrorCode::Training,
            PipelineError::Artifact(_) => ErrorCode::Artifact,
            PipelineError::Internal(_) => ErrorCode::Internal,
        }
    }
}

/// The error body every failed endpoint returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl From<&PipelineError> for ApiError {
    fn from(e: &PipelineError) -> Self {
        ApiError { code: ErrorCode::from(e), message: e.to_string() }
    }
}

/// Wrapper that keys the error under `"error"` on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub error: ApiError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QchatScoreRequest {
    /// The ten item responses, each 0 or 1.
    pub responses: [u8; 10],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QchatScoreResponse {
    pub score: u8,
    pub flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRequest {
    pub predictions: Vec<u8>,
    pub truth: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsResponse {
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRequest {
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestResponse {
    pub report: IngestReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLocalRequest {
    pub config: RunConfig,
    pub source: SourceId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLocalResponse {
    pub outcome: LocalTrainOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederateRequest {
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederateResponse {
    pub global: GlobalModel,
    pub rounds: Vec<RoundLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRequest {
    pub config: RunConfig,
    #[serde(default)]
    pub scope: MatrixScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResponse {
    pub reports: Vec<MetricsReport>,
    pub table: String,
}
