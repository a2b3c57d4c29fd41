//! Typed client for the screening service.
//!
//! Thin by design: every method posts one request body from
//! [`fedscreen_core::api`] and returns the matching response. Service
//! failures surface as [`ClientError::Api`] carrying the envelope's
//! code, so callers (the CLI in particular) can map errors to exit
//! codes without parsing messages.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use fedscreen_core::api::{
    ErrorCode, ErrorEnvelope, FederateRequest, FederateResponse, HealthResponse, IngestRequest,
    IngestResponse, MetricsRequest, MetricsResponse, QchatScoreRequest, QchatScoreResponse,
    ReportRequest, ReportResponse, TrainLocalRequest, TrainLocalResponse,
};

/// What a service call can fail with.
#[derive(Debug, Error)]
pub enum ClientError {
    /// The request never produced a decodable HTTP exchange.
    #[error("transport: {0}")]
    Transport(String),
    /// The service answered with an error envelope.
    #[error("service error ({status}): {message}")]
    Api { code: ErrorCode, message: String, status: u16 },
}

impl ClientError {
    /// Process exit code for this failure: the envelope's contract
    /// code, or 1 when the service never answered.
    pub fn exit_code(&self) -> i32 {
        match self {
            ClientError::Transport(_) => 1,
            ClientError::Api { code, .. } => code.exit_code(),
        }
    }
}

/// Handle to one service endpoint.
#[derive(Debug, Clone)]
pub struct ApiClient {
    base: String,
    http: reqwest::Client,
}

impl ApiClient {
    /// A client for the service at `base`, e.g. `http://127.0.0.1:8470`.
    pub fn new(base: impl Into<String>) -> ApiClient {
        let mut base = base.into();
        while base.ends_with('/') {
            base.pop();
        }
        ApiClient { base, http: reqwest::Client::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub async fn health(&self) -> Result<HealthResponse, ClientError> {
        let url = format!("{}/api/v1/health", self.base);
        let resp = self.http.get(&url).send().await.map_err(transport)?;
        decode(resp).await
    }

    pub async fn qchat_score(
        &self,
        req: &QchatScoreRequest,
    ) -> Result<QchatScoreResponse, ClientError> {
        self.post("qchat/score", req).await
    }

    pub async fn metrics(&self, req: &MetricsRequest) -> Result<MetricsResponse, ClientError> {
        self.post("metrics", req).await
    }

    pub async fn ingest(&self, req: &IngestRequest) -> Result<IngestResponse, ClientError> {
        self.post("ingest", req).await
    }

    pub async fn train_local(
        &self,
        req: &TrainLocalRequest,
    ) -> Result<TrainLocalResponse, ClientError> {
        self.post("train-local", req).await
    }

    pub async fn federate(&self, req: &FederateRequest) -> Result<FederateResponse, ClientError> {
        self.post("federate", req).await
    }

    pub async fn report(&self, req: &ReportRequest) -> Result<ReportResponse, ClientError> {
        self.post("report", req).await
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        req: &Req,
    ) -> Result<Resp, ClientError> {
        let url = format!("{}/api/v1/{path}", self.base);
        let resp = self.http.post(&url).json(req).send().await.map_err(transport)?;
        decode(resp).await
    }
}

fn transport(e: reqwest::Error) -> ClientError {
    ClientError::Transport(e.to_string())
}

/// Parse a success body, or turn a failure status into [`ClientError::Api`].
async fn decode<Resp: DeserializeOwned>(resp: reqwest::Response) -> Result<Resp, ClientError> {
    let status = resp.status();
    if status.is_success() {
        return resp.json().await.map_err(transport);
    }
    let status = status.as_u16();
    let text = resp.text().await.unwrap_or_default();
    match serde_json::from_str::<ErrorEnvelope>(&text) {
        Ok(envelope) => Err(ClientError::Api {
            code: envelope.error.code,
            message: envelope.error.message,
            status,
        }),
        Err(_) => Err(ClientError::Api {
            code: ErrorCode::Internal,
            message: if text.is_empty() { format!("HTTP {status}") } else { text },
            status,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_url_is_normalized() {
        assert_eq!(ApiClient::new("http://x:1//").base(), "http://x:1");
        assert_eq!(ApiClient::new("http://x:1").base(), "http://x:1");
    }

    #[test]
    fn exit_codes_follow_the_envelope() {
        let api = ClientError::Api { code: ErrorCode::Artifact, message: String::new(), status: 404 };
        assert_eq!(api.exit_code(), 4);
        assert_eq!(ClientError::Transport("x".into()).exit_code(), 1);
    }
}
