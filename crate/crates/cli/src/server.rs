//! HTTP front of the session service.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use egt_core::EgtConfig;
use serde::Serialize;
use serde_json::json;
use tokio::sync::{Mutex, RwLock};

use crate::session::{ActionOutcome, ActionReport, Session, SessionError, SessionSetup};

pub struct AppState {
    cfg: EgtConfig,
    log_dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(cfg: EgtConfig, log_dir: Option<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            cfg,
            log_dir,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        })
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::Scene(_) | SessionError::Invalid(_) => StatusCode::BAD_REQUEST,
            SessionError::Finished | SessionError::NoDirective | SessionError::WrongDirective { .. } => {
                StatusCode::CONFLICT
            }
            SessionError::Generation { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Io(_) | SessionError::Replay { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(StatusCode::BAD_REQUEST, e.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/action", post(action))
        .route("/sessions/{id}/log", get(log))
        .with_state(state)
}

async fn session(state: &AppState, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
    state
        .sessions
        .read()
        .await
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no session `{id}`")))
}

async fn create(
    State(state): State<Arc<AppState>>,
    body: Result<Json<SessionSetup>, JsonRejection>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let Json(setup) = body?;
    let id = format!("s{:04}", state.next_id.fetch_add(1, Ordering::Relaxed));
    let sink = state.log_dir.as_ref().map(|d| d.join(format!("{id}.jsonl")));
    let s = Session::create(id.clone(), setup, sink)?;
    let scene = s.scene.to_file();
    state.sessions.write().await.insert(id.clone(), Arc::new(Mutex::new(s)));
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "scene": scene }))))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AlternativeView {
    surface: String,
    depth: usize,
    props: u32,
    cost: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StepView {
    directive: String,
    alternatives: Vec<AlternativeView>,
    directive_id: String,
    step: usize,
}

async fn show(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    let s = session(&state, &id).await?;
    let s = s.lock().await;
    Ok(Json(json!({
        "id": s.id,
        "generator": s.generator,
        "cursor": s.cursor,
        "totalSteps": s.plan.steps.len(),
        "done": s.is_done(),
        "scene": s.scene.to_file(),
        "plan": s.plan,
        "context": s.ctx,
        "pending": s.pending,
        "log": s.log,
    })))
}

async fn step(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StepView> {
    let s = session(&state, &id).await?;
    let mut s = s.lock().await;
    let p = s.step(&state.cfg)?;
    Ok(Json(StepView {
        directive: p.narration.best().surface.clone(),
        alternatives: p
            .narration
            .alternatives
            .iter()
            .map(|a| AlternativeView {
                surface: a.surface.clone(),
                depth: a.depth,
                props: a.props(),
                cost: a.cost,
            })
            .collect(),
        directive_id: p.directive_id.clone(),
        step: p.step,
    }))
}

async fn action(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<ActionReport>, JsonRejection>,
) -> ApiResult<ActionOutcome> {
    let s = session(&state, &id).await?;
    let Json(report) = body?;
    let mut s = s.lock().await;
    Ok(Json(s.act(&report, &state.cfg)?))
}

async fn log(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Vec<egt_core::stats::LogEntry>> {
    let s = session(&state, &id).await?;
    let s = s.lock().await;
    Ok(Json(s.log.clone()))
}

pub async fn serve(state: Arc<AppState>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
