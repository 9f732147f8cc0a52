//! Stateless HTTP front end for the checker.
//!
//! `POST /check` takes `{"model": {...}, "formula": "...", "backend": "relational"}`
//! (`backend`, `trace` and `lenient_atoms` are optional) and answers with
//! the same result document the CLI prints. Errors come back as
//! `{"error": {"kind", "message", "location"}}`.
//!
//! `GET /health` reports the crate version and uptime in seconds.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Instant;

use atl_core::engine::CheckOptions;
use atl_core::pipeline::{self, ErrorKind, PipelineError};
use atl_core::Backend;
use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Value};

pub const DEFAULT_BODY_LIMIT: usize = 64 * 1024 * 1024;
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub body_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            body_limit: DEFAULT_BODY_LIMIT,
        }
    }
}

#[derive(Debug)]
struct AppState {
    started: Instant,
}

pub fn router(config: Config) -> Router {
    let state = Arc::new(AppState {
        started: Instant::now(),
    });
    Router::new()
        .route("/check", post(check))
        .route("/health", get(health))
        .layer(DefaultBodyLimit::max(config.body_limit))
        .with_state(state)
}

/// Serves until the process receives Ctrl-C.
pub async fn serve(addr: SocketAddr, config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Blocking wrapper around [`serve`] with its own runtime.
pub fn run(addr: SocketAddr, config: Config) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(addr, config))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
    uptime: f64,
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
        uptime: state.started.elapsed().as_secs_f64(),
    })
}

struct ApiError(PipelineError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = if self.0.kind.is_input_error() {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::INTERNAL_SERVER_ERROR
        };
        (status, Json(json!({ "error": self.0 }))).into_response()
    }
}

fn schema(location: &str, message: &str) -> ApiError {
    ApiError(PipelineError::new(
        ErrorKind::SchemaError,
        message,
        Some(location.to_string()),
    ))
}

fn flag(req: &serde_json::Map<String, Value>, key: &str) -> Result<bool, ApiError> {
    match req.get(key) {
        None | Some(Value::Null) => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(schema(&format!("/{key}"), "expected a boolean")),
    }
}

fn parse_request(body: &[u8]) -> Result<(Value, String, CheckOptions), ApiError> {
    let value: Value = serde_json::from_slice(body).map_err(|e| {
        ApiError(PipelineError::new(
            ErrorKind::ParseError,
            e.to_string(),
            Some(format!("{}:{}", e.line(), e.column())),
        ))
    })?;
    let Value::Object(mut req) = value else {
        return Err(schema("/", "expected an object"));
    };
    let formula = match req.get("formula") {
        Some(Value::String(f)) => f.clone(),
        Some(_) => return Err(schema("/formula", "expected a string")),
        None => return Err(schema("/formula", "missing required field")),
    };
    let backend = match req.get("backend") {
        None | Some(Value::Null) => Backend::default(),
        Some(Value::String(b)) => b.parse().map_err(|e: String| schema("/backend", &e))?,
        Some(_) => return Err(schema("/backend", "expected a string")),
    };
    let options = CheckOptions {
        backend,
        trace: flag(&req, "trace")?,
        lenient_atoms: flag(&req, "lenient_atoms")?,
    };
    let model = req
        .remove("model")
        .ok_or_else(|| schema("/model", "missing required field"))?;
    Ok((model, formula, options))
}

async fn check(body: Bytes) -> Result<Response, ApiError> {
    let (model, formula, options) = parse_request(&body)?;
    let output = tokio::task::spawn_blocking(move || {
        pipeline::check_value(&model, &formula, options).map_err(|e| e.nested_under("/model"))
    })
    .await
    .map_err(|e| ApiError(PipelineError::new(ErrorKind::Internal, e.to_string(), None)))?
    .map_err(ApiError)?;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        output.document,
    )
        .into_response())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_fields() {
        let err = parse_request(br#"{"model": {}}"#).err().unwrap();
        assert_eq!(err.0.location.as_deref(), Some("/formula"));
        let err = parse_request(br#"{"formula": "x"}"#).err().unwrap();
        assert_eq!(err.0.location.as_deref(), Some("/model"));
        let err = parse_request(br#"{"model": {}, "formula": "x", "backend": "sql"}"#)
            .err()
            .unwrap();
        assert_eq!(err.0.location.as_deref(), Some("/backend"));
        let (_, f, opts) =
            parse_request(br#"{"model": {}, "formula": "x", "backend": "direct", "trace": true}"#)
                .ok()
                .unwrap();
        assert_eq!(f, "x");
        assert_eq!(opts.backend, Backend::Direct);
        assert!(opts.trace);
    }
}
