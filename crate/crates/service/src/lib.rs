//! HTTP service exposing the screening pipeline over JSON.
//!
//! Routes live under `/api/v1`. Request and response bodies are the
//! types in [`fedscreen_core::api`]; failures return an
//! [`ErrorEnvelope`] whose code fixes the HTTP status. Pipeline work is
//! synchronous CPU- and file-bound code, so every handler moves it onto
//! the blocking thread pool.

use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use fedscreen_core::api::{
    ApiError, ErrorEnvelope, FederateRequest, FederateResponse, HealthResponse, IngestRequest,
    IngestResponse, MetricsRequest, MetricsResponse, QchatScoreRequest, QchatScoreResponse,
    ReportRequest, ReportResponse, TrainLocalRequest, TrainLocalResponse,
};
use fedscreen_core::dataset::qchat_score;
use fedscreen_core::evaluation::{confusion, metrics};
use fedscreen_core::pipeline::{
    run_federate, run_ingest, run_report, run_train_local, PipelineError,
};

/// The service's routes, ready to serve or to mount in a test.
pub fn router() -> Router {
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/qchat/score", post(qchat))
        .route("/api/v1/metrics", post(compute_metrics))
        .route("/api/v1/ingest", post(ingest))
        .route("/api/v1/train-local", post(train_local))
        .route("/api/v1/federate", post(federate))
        .route("/api/v1/report", post(report))
}

/// Serve the router on an already-bound listener until the task is
/// dropped or the process exits.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// Handler-side error: a classified pipeline failure rendered as the
/// JSON error envelope with its mapped status.
struct AppError(PipelineError);

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let error = ApiError::from(&self.0);
        let status = StatusCode::from_u16(error.code.http_status())
            .unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(ErrorEnvelope { error })).into_response()
    }
}

impl From<PipelineError> for AppError {
    fn from(e: PipelineError) -> Self {
        AppError(e)
    }
}

impl From<JsonRejection> for AppError {
    fn from(rejection: JsonRejection) -> Self {
        AppError(PipelineError::Config(format!("invalid request body: {}", rejection.body_text())))
    }
}

/// Run one pipeline call on the blocking pool.
async fn blocking<T, F>(work: F) -> Result<Json<T>, AppError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, PipelineError> + Send + 'static,
{
    let result = tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| AppError(PipelineError::Internal(format!("worker failed: {e}"))))?;
    result.map(Json).map_err(AppError)
}

async fn health() -> Json<HealthResponse> {
    Json(HealthResponse { status: "ok".into(), version: env!("CARGO_PKG_VERSION").into() })
}

async fn qchat(
    payload: Result<Json<QchatScoreRequest>, JsonRejection>,
) -> Result<Json<QchatScoreResponse>, AppError> {
    let Json(req) = payload?;
    if let Some(bad) = req.responses.iter().find(|&&r| r > 1) {
        return Err(AppError(PipelineError::Config(format!(
            "responses must be 0 or 1, got {bad}"
        ))));
    }
    let (score, flag) = qchat_score(&req.responses);
    Ok(Json(QchatScoreResponse { score, flag: flag == 1 }))
}

async fn compute_metrics(
    payload: Result<Json<MetricsRequest>, JsonRejection>,
) -> Result<Json<MetricsResponse>, AppError> {
    let Json(req) = payload?;
    let cm = confusion(&req.predictions, &req.truth).map_err(PipelineError::from)?;
    let metrics = metrics(&cm).map_err(PipelineError::from)?;
    Ok(Json(MetricsResponse { metrics }))
}

async fn ingest(
    payload: Result<Json<IngestRequest>, JsonRejection>,
) -> Result<Json<IngestResponse>, AppError> {
    let Json(req) = payload?;
    blocking(move || Ok(IngestResponse { report: run_ingest(&req.config)? })).await
}

async fn train_local(
    payload: Result<Json<TrainLocalRequest>, JsonRejection>,
) -> Result<Json<TrainLocalResponse>, AppError> {
    let Json(req) = payload?;
    blocking(move || {
        Ok(TrainLocalResponse { outcome: run_train_local(&req.config, req.source)? })
    })
    .await
}

async fn federate(
    payload: Result<Json<FederateRequest>, JsonRejection>,
) -> Result<Json<FederateResponse>, AppError> {
    let Json(req) = payload?;
    blocking(move || {
        let run = run_federate(&req.config)?;
        Ok(FederateResponse { global: run.global, rounds: run.rounds })
    })
    .await
}

async fn report(
    payload: Result<Json<ReportRequest>, JsonRejection>,
) -> Result<Json<ReportResponse>, AppError> {
    let Json(req) = payload?;
    blocking(move || {
        let bundle = run_report(&req.config, req.scope)?;
        Ok(ReportResponse { reports: bundle.reports, table: bundle.table })
    })
    .await
}
