//! HTTP + JSON session service with a server-sent event stream of states.

use std::collections::HashMap;
use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use futures::Stream;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast;
use windform_core::config::{Project, ProjectConfig, SwarmScenario};
use windform_core::session::{Command, ExportRequest, ParamsPatch, Session, SessionState, Stroke};
use windform_core::Error;

/// Error body: `{"error": message, "fields": [...]}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    fields: Vec<String>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            fields: Vec::new(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown session {id:?}"))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(fields) => Self {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                message: "validation failed".into(),
                fields,
            },
            Error::Busy(m) => Self::new(StatusCode::CONFLICT, m),
            Error::Io { .. } => Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
            other => Self::new(StatusCode::UNPROCESSABLE_ENTITY, other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": self.message, "fields": self.fields});
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Parses a JSON body ourselves so malformed input gets the same error
/// shape as validation failures.
fn parse<T: DeserializeOwned>(body: Value, what: &str) -> ApiResult<T> {
    serde_json::from_value(body).map_err(|e| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        message: format!("malformed {what}"),
        fields: vec![format!("{what}: {e}")],
    })
}

struct SessionSlot {
    session: Mutex<Session>,
    events: broadcast::Sender<Arc<SessionState>>,
}

impl SessionSlot {
    fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|p| p.into_inner())
    }
}

pub struct AppState {
    project: Arc<Project>,
    output_dir: PathBuf,
    sessions: Mutex<HashMap<String, Arc<SessionSlot>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(project: Project) -> Self {
        let output_dir = project.config.output_dir();
        Self {
            project: Arc::new(project),
            output_dir,
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    fn slot(&self, id: &str) -> ApiResult<Arc<SessionSlot>> {
        self.sessions
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/strokes", post(add_stroke))
        .route("/sessions/{id}/params", patch(patch_params))
        .route("/sessions/{id}/run", post(run_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/stream", get(stream))
        .route("/sessions/{id}/export", post(export))
        .route("/sessions/{id}/log", get(get_log))
        .with_state(state)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    /// Replaces the served project; paths resolve against the served
    /// config's directory.
    #[serde(default)]
    config: Option<Value>,
    /// Swarm scenario name; the first one when absent.
    #[serde(default)]
    scenario: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
}

const DEFAULT_AGENTS: usize = 100;
const DEFAULT_SEED: u64 = 42;

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<Value>>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let req: CreateSession = match body {
        Some(Json(v)) => parse(v, "body")?,
        None => CreateSession::default(),
    };
    let project = match req.config {
        Some(v) => {
            let mut cfg: ProjectConfig = parse(v, "config")?;
            cfg.base_dir = app.project.config.base_dir.clone();
            let p = tokio::task::spawn_blocking(move || Project::load(cfg))
                .await
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
            Arc::new(p.map_err(|e| prefix_fields(e, "config"))?)
        }
        None => app.project.clone(),
    };
    let mut scenario = match &req.scenario {
        Some(name) => project
            .config
            .swarms
            .iter()
            .find(|s| &s.name == name)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    format!("no swarm scenario named {name:?}"),
                )
            })?,
        None => project
            .config
            .swarms
            .first()
            .cloned()
            .unwrap_or_else(|| SwarmScenario::new("session", DEFAULT_AGENTS, DEFAULT_SEED, 1)),
    };
    if let Some(seed) = req.seed {
        scenario.seed = seed;
    }
    let n = app.next_id.fetch_add(1, Ordering::Relaxed);
    let id = format!("s{n}");
    let session = Session::new(id.clone(), project, scenario)?;
    let (events, _) = broadcast::channel(256);
    let slot = Arc::new(SessionSlot {
        session: Mutex::new(session),
        events,
    });
    app.sessions
        .lock()
        .unwrap_or_else(|p| p.into_inner())
        .insert(id.clone(), slot);
    log::info!("session {id} created");
    Ok((StatusCode::CREATED, Json(json!({"session_id": id}))))
}

fn prefix_fields(e: Error, prefix: &str) -> ApiError {
    match e {
        Error::Invalid(list) => {
            Error::Invalid(list.into_iter().map(|f| format!("{prefix}.{f}")).collect()).into()
        }
        other => other.into(),
    }
}

async fn delete_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let slot = app.slot(&id)?;
    if slot.lock().is_running() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("session {id} is running"),
        ));
    }
    app.sessions.lock().unwrap_or_else(|p| p.into_inner()).remove(&id);
    Ok(StatusCode::NO_CONTENT)
}

async fn add_stroke(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<Value>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let stroke: Stroke = parse(body, "stroke")?;
    let ack = slot
        .lock()
        .submit(Command::Stroke(stroke))
        .map_err(|e| prefix_fields(e, "stroke"))?;
    Ok(Json(
        json!({"track_index": ack.track_index, "revision": ack.revision}),
    ))
}

async fn patch_params(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<Value>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let patch: ParamsPatch = parse(body, "params")?;
    let ack = slot.lock().submit(Command::Params(patch))?;
    Ok(Json(json!({"revision": ack.revision})))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunRequest {
    steps: usize,
}

#[derive(Debug, Serialize)]
struct RunResponse {
    step_index: u64,
    metrics: windform_core::swarm::SwarmMetrics,
    revision: u64,
}

async fn run_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<Value>,
) -> ApiResult<Json<RunResponse>> {
    let slot = app.slot(&id)?;
    let req: RunRequest = parse(body, "run")?;
    if req.steps < 1 {
        return Err(Error::Invalid(vec!["steps: steps must be ≥ 1".into()]).into());
    }
    slot.lock().begin_run()?;
    let worker = slot.clone();
    let out = tokio::task::spawn_blocking(move || {
        for _ in 0..req.steps {
            // The lock is held for one step at a time so commands can queue
            // in between; they apply inside the next `advance`.
            let mut s = worker.lock();
            s.advance();
            if worker.events.receiver_count() > 0 {
                let _ = worker.events.send(Arc::new(s.state()));
            }
        }
        let mut s = worker.lock();
        s.end_run();
        RunResponse {
            step_index: s.sim().step_index(),
            metrics: s.sim().metrics(),
            revision: s.revision(),
        }
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(Json(out))
}

async fn get_state(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionState>> {
    let slot = app.slot(&id)?;
    let state = slot.lock().state();
    Ok(Json(state))
}

async fn get_log(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let s = slot.lock();
    Ok(Json(json!({
        "scenario": s.scenario(),
        "log": s.log(),
        "step_index": s.sim().step_index(),
    })))
}

fn state_event(state: &SessionState) -> Event {
    Event::default()
        .event("state")
        .id(state.step_index.to_string())
        .json_data(state)
        .unwrap_or_else(|e| Event::default().event("error").data(e.to_string()))
}

/// Current state first, then one event per completed step. Steps at or
/// before the last one sent are dropped, so each step is emitted at most
/// once and in order.
async fn stream(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let slot = app.slot(&id)?;
    let rx = slot.events.subscribe();
    let first = Arc::new(slot.lock().state());
    let events = futures::stream::unfold(
        (Some(first), rx, None::<u64>),
        |(mut first, mut rx, mut last)| async move {
            loop {
                let state = match first.take() {
                    Some(s) => s,
                    None => match rx.recv().await {
                        Ok(s) => s,
                        Err(broadcast::error::RecvError::Lagged(n)) => {
                            log::debug!("stream lagged by {n} states");
                            continue;
                        }
                        Err(broadcast::error::RecvError::Closed) => return None,
                    },
                };
                if last.is_some_and(|l| state.step_index <= l) {
                    continue;
                }
                last = Some(state.step_index);
                return Some((Ok(state_event(&state)), (None, rx, last)));
            }
        },
    );
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}

async fn export(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<Value>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let req: ExportRequest = parse(body, "export")?;
    let dir = app.output_dir.clone();
    let paths = tokio::task::spawn_blocking(move || slot.lock().export(&req, &dir))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(json!({"paths": paths})))
}

/// Serves `project` on `addr` until the process is stopped.
pub async fn serve(project: Project, addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let app = router(Arc::new(AppState::new(project)));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
