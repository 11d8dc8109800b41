//! HTTP front end for the laboratory operations.
//!
//! Routes: `GET /v1/health`, `GET /v1/corpus`, and `POST /v1/ops` with an operation as the
//! JSON body. Errors come back as `{"error": message}`.

use std::net::SocketAddr;

use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use sslab_experiments::{corpus_list, execute, ExperimentError, Op};
use tokio::net::TcpListener;

pub fn router() -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/corpus", get(corpus))
        .route("/v1/ops", post(ops))
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ExperimentError> for ApiError {
    fn from(e: ExperimentError) -> Self {
        let status = match e.root() {
            ExperimentError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ExperimentError::UnknownGame(_) | ExperimentError::UnknownSpec(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError(status, e.to_string())
    }
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

async fn blocking<F>(f: F) -> Result<Json<Value>, ApiError>
where
    F: FnOnce() -> Result<Value, ExperimentError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(result) => Ok(Json(result?)),
        Err(e) => Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("worker failed: {e}"))),
    }
}

async fn corpus() -> Result<Json<Value>, ApiError> {
    blocking(|| Ok(serde_json::to_value(corpus_list()?)?)).await
}

async fn ops(body: Result<Json<Op>, JsonRejection>) -> Result<Json<Value>, ApiError> {
    let Json(op) = body.map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.body_text()))?;
    tracing::info!(?op, "request");
    blocking(move || execute(&op)).await
}

/// Binds `addr` and serves until the process ends. Port 0 picks a free port; the bound
/// address is passed to `ready` before serving starts.
pub async fn serve(addr: SocketAddr, ready: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    ready(listener.local_addr()?);
    axum::serve(listener, router()).await
}
