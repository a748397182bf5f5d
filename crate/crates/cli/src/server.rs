//! HTTP service backing the interactive designer.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{rejection::JsonRejection, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cellform_core::{score, Instance, MetricsReport};
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::assignment_file::{AssignmentBody, LabeledAssignment};
use crate::export::{InstanceEcho, SolutionExport};

const PLACEHOLDER_PAGE: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>cellform</title></head>\n<body><h1>cellform</h1><p>No UI assets configured. Start with <code>--ui-dir</code> or use \
<a href=\"/api/solution\">/api/solution</a>.</p></body></html>\n";

/// Immutable state shared by all requests.
#[derive(Debug)]
pub struct AppState {
    pub instance: Instance,
    pub export: SolutionExport,
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    pub error: String,
}

fn reject(status: StatusCode, error: String) -> Response {
    (status, Json(ApiError { error })).into_response()
}

async fn get_solution(State(state): State<Arc<AppState>>) -> Json<SolutionExport> {
    Json(state.export.clone())
}

async fn get_instance(State(state): State<Arc<AppState>>) -> Json<InstanceEcho> {
    Json(state.export.instance.clone())
}

/// Scores a client-side assignment against the loaded instance.
pub fn score_body(inst: &Instance, body: &AssignmentBody) -> Result<MetricsReport, String> {
    let assignment = LabeledAssignment::from(body).resolve(inst).map_err(|e| e.to_string())?;
    score::<f64>(inst, &assignment).map_err(|e| e.to_string())
}

async fn post_score(State(state): State<Arc<AppState>>, body: Result<Json<AssignmentBody>, JsonRejection>) -> Response {
    let Json(body) = match body {
        Ok(b) => b,
        Err(e) => return reject(e.status(), e.body_text()),
    };
    match score_body(&state.instance, &body) {
        Ok(report) => Json(report).into_response(),
        Err(msg) => {
            log::debug!("rejected score request: {msg}");
            reject(StatusCode::UNPROCESSABLE_ENTITY, msg)
        }
    }
}

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/solution", get(get_solution))
        .route("/api/instance", get(get_instance))
        .route("/api/score", post(post_score))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER_PAGE) })),
    }
}

/// Binds `port` on localhost and serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>, port: u16, ui_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind port {port}: {e}"))?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
