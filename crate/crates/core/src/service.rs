//! JSON-over-HTTP front end.
//!
//! Every handler parses its body, runs the matching [`crate::api`] function on
//! the blocking pool and returns either the result or an [`ErrorResponse`].
//! Validation and usage errors map to 400, estimation failures to 422.

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::api::{self, ErrorBody, ErrorResponse};
use crate::error::{Error, ErrorKind};

pub const DEFAULT_MAX_REPS: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct ServiceConfig {
    /// Largest replication count accepted per simulation cell.
    pub max_reps: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_reps: DEFAULT_MAX_REPS,
        }
    }
}

pub fn router(config: ServiceConfig) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/estimate", post(estimate))
        .route("/estimate-diff", post(estimate_diff))
        .route("/fit-gld", post(fit_gld))
        .route("/simulate", post(simulate))
        .with_state(config)
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn error_response(status: StatusCode, body: ErrorBody) -> Response {
    (status, Json(ErrorResponse { error: body })).into_response()
}

fn from_error(e: &Error) -> Response {
    let status = match e.kind() {
        ErrorKind::Usage | ErrorKind::Validation => StatusCode::BAD_REQUEST,
        ErrorKind::Estimation => StatusCode::UNPROCESSABLE_ENTITY,
    };
    error_response(status, ErrorBody::from(e))
}

fn internal() -> Response {
    error_response(
        StatusCode::INTERNAL_SERVER_ERROR,
        ErrorBody {
            code: "internal".into(),
            kind: "internal".into(),
            message: "internal error".into(),
            location: None,
        },
    )
}

// The error is already the finished HTTP response.
#[allow(clippy::result_large_err)]
fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, Response> {
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        error_response(
            StatusCode::BAD_REQUEST,
            ErrorBody {
                code: "invalid_request".into(),
                kind: ErrorKind::Usage.code().into(),
                message: e.into_inner().to_string(),
                location: (path != ".").then_some(path),
            },
        )
    })
}

/// Parses `body` as `Req`, runs `f` off the async runtime and encodes the outcome.
async fn dispatch<Req, Resp, F>(body: Bytes, f: F) -> Response
where
    Req: DeserializeOwned + Send + 'static,
    Resp: Serialize + Send + 'static,
    F: FnOnce(Req) -> crate::Result<Resp> + Send + 'static,
{
    let req = match parse::<Req>(&body) {
        Ok(req) => req,
        Err(resp) => return resp,
    };
    match tokio::task::spawn_blocking(move || f(req)).await {
        Ok(Ok(resp)) => (StatusCode::OK, [(header::CACHE_CONTROL, "no-store")], Json(resp)).into_response(),
        Ok(Err(e)) => from_error(&e),
        // A panic in the estimator; its message stays in the server.
        Err(_) => internal(),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn estimate(body: Bytes) -> Response {
    dispatch(body, |req: api::EstimateRequest| api::estimate(&req)).await
}

async fn estimate_diff(body: Bytes) -> Response {
    dispatch(body, |req: api::DiffRequest| api::estimate_difference(&req)).await
}

async fn fit_gld(body: Bytes) -> Response {
    dispatch(body, |req: api::FitRequest| api::fit_gld(&req)).await
}

async fn simulate(State(config): State<ServiceConfig>, body: Bytes) -> Response {
    dispatch(body, move |req: api::SimRequest| api::simulate(&req, config.max_reps)).await
}
