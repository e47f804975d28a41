//! Stateless HTTP front end. Each request runs the pure pipeline; nothing
//! is kept between requests.

use axum::body::Bytes;
use axum::extract::Query;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};

use crate::app::{self, AppError, AnalyzeRequest, ComputeOptions, OutputFormat};

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Debug, Serialize)]
struct ErrorDetail<'a> {
    kind: &'a str,
    message: String,
}

fn error_response(status: StatusCode, kind: &str, message: String) -> Response {
    let body = app::render_json(&ErrorBody {
        error: ErrorDetail { kind, message },
    });
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = if self.is_validation() {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::UNPROCESSABLE_ENTITY
        };
        error_response(status, self.kind(), self.to_string())
    }
}

fn json(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct TransferQuery {
    pub monic: bool,
    pub discrete: bool,
}

fn utf8(body: &Bytes) -> Result<&str, AppError> {
    std::str::from_utf8(body).map_err(|_| AppError::Input("request body is not UTF-8".into()))
}

/// Body: a graph file. Response: the structured transfer format, byte for
/// byte what `sfg compute --format structured` prints.
async fn transfer(Query(q): Query<TransferQuery>, body: Bytes) -> Result<Response, AppError> {
    let g = app::parse_graph_text(utf8(&body)?)?;
    let opts = ComputeOptions {
        monic: q.monic,
        discrete: q.discrete,
        format: OutputFormat::Structured,
        ..Default::default()
    };
    Ok(json(app::compute(&g, &opts)?.output))
}

/// Body: an [`AnalyzeRequest`]. Response: the same JSON that
/// `sfg analyze --json` prints.
async fn analyze(body: Bytes) -> Result<Response, AppError> {
    let req: AnalyzeRequest = serde_json::from_str(utf8(&body)?)
        .map_err(|e| AppError::Input(format!("invalid analyze request: {e}")))?;
    Ok(json(app::render_json(&app::analyze(&req)?)))
}

async fn health() -> &'static str {
    "ok"
}

async fn not_found() -> Response {
    error_response(StatusCode::NOT_FOUND, "not-found", "no such endpoint".into())
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/api/transfer", post(transfer))
        .route("/api/analyze", post(analyze))
        .fallback(not_found)
}

pub async fn serve(addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router()).await
}
