//! HTTP suggestion service.
//!
//! | route           | response                                               |
//! |-----------------|--------------------------------------------------------|
//! | `POST /suggest` | `{"suggestions": [{token, probability}], "model_info"}` |
//! | `GET /health`   | `{"status": "ok"}`                                     |
//! | `GET /model`    | model summary and the number of suggestions served     |
//!
//! `/suggest` takes `{"context": string, "k": integer}` with `k` defaulting
//! to 5. Malformed JSON, `k < 1` and contexts over 10,000 characters are
//! 400; a context with no known word is 422 `{"error": "no usable context"}`.
//! The model is immutable; the only shared mutable state is a counter.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gramweave_core::lstm::Suggestion;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::model::SuggestModel;

pub const MAX_CONTEXT_CHARS: usize = 10_000;
pub const DEFAULT_K: usize = 5;
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Deserialize)]
pub struct SuggestRequest {
    pub context: String,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    DEFAULT_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionBody {
    pub token: String,
    pub probability: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub corpus_digest: String,
    pub n: usize,
    pub embedding_source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub suggestions: Vec<SuggestionBody>,
    pub model_info: ModelSummary,
}

#[derive(Debug)]
struct AppState {
    model: SuggestModel,
    summary: ModelSummary,
    suggest_requests: AtomicU64,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(origin) = origin.to_str() else { return false };
    let Some((_, rest)) = origin.split_once("://") else { return false };
    let host = if let Some(v6) = rest.strip_prefix('[') {
        v6.split(']').next().unwrap_or_default()
    } else {
        rest.split(':').next().unwrap_or_default()
    };
    matches!(host, "localhost" | "127.0.0.1" | "::1")
}

pub fn router(model: SuggestModel) -> Router {
    let info = model.info();
    let summary = ModelSummary {
        corpus_digest: info.corpus_digest,
        n: info.n,
        embedding_source: info.embedding_source.into(),
    };
    let state = Arc::new(AppState { model, summary, suggest_requests: AtomicU64::new(0) });
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin, _| is_local_origin(origin)))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/suggest", post(suggest))
        .route("/health", get(health))
        .route("/model", get(model_info))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "not found") })
        .layer(cors)
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn model_info(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let info = state.model.info();
    Json(json!({
        "corpus_digest": info.corpus_digest,
        "n": info.n,
        "embedding_source": info.embedding_source,
        "readout": info.readout,
        "vocab_size": info.vocab_size,
        "d_emb": info.d_emb,
        "d_hidden": info.d_hidden,
        "suggest_requests": state.suggest_requests.load(Ordering::Relaxed),
    }))
}

async fn suggest(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: SuggestRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    if req.k < 1 {
        return error(StatusCode::BAD_REQUEST, "k must be at least 1");
    }
    if req.context.chars().count() > MAX_CONTEXT_CHARS {
        return error(StatusCode::BAD_REQUEST, format!("context exceeds {MAX_CONTEXT_CHARS} characters"));
    }
    state.suggest_requests.fetch_add(1, Ordering::Relaxed);
    let worker = Arc::clone(&state);
    let result = tokio::task::spawn_blocking(move || worker.model.suggest(&req.context, req.k)).await;
    match result {
        Ok(Ok(suggestions)) => Json(SuggestResponse {
            suggestions: suggestions
                .into_iter()
                .map(|Suggestion { token, probability }| SuggestionBody { token, probability })
                .collect(),
            model_info: state.summary.clone(),
        })
        .into_response(),
        Ok(Err(gramweave_core::Error::NoUsableContext)) => error(StatusCode::UNPROCESSABLE_ENTITY, "no usable context"),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Serve `model` on `addr` until Ctrl-C.
pub async fn serve(model: SuggestModel, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(model))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
