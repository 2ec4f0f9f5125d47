//! Session-based HTTP service under `/api/v1`.
//!
//! Each session owns a model and a selection behind its own lock: selection
//! updates take it exclusively, reads share it. Sessions never touch each
//! other's locks.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::services::ServeDir;
use uuid::Uuid;

use qkdvm_core::builtin;
use qkdvm_core::compose::{check_configuration, compose, propagate, ComposeError, DecisionState};
use qkdvm_core::sim::{simulate_architecture, PathResult, SimError, SimulationParams};
use qkdvm_core::text::{parse_model_with, NoIncludes};
use qkdvm_core::{
    export_architecture, validate_model, Configuration, ExportFormat, Ident, OvmModel,
    ValidationReport,
};

pub const DEFAULT_PORT: u16 = 8787;

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Session {
    pub id: Uuid,
    pub model: Arc<OvmModel>,
    pub selection: Configuration,
    pub created_at: u64,
    pub updated_at: u64,
}

impl Session {
    fn new(model: OvmModel) -> Self {
        let t = now();
        Session {
            id: Uuid::new_v4(),
            selection: Configuration::new(model.name.as_str(), Vec::<Ident>::new()),
            model: Arc::new(model),
            created_at: t,
            updated_at: t,
        }
    }

    fn state(&self) -> StateBody {
        let decisions = match propagate(&self.model, &self.selection) {
            Ok(d) => d,
            // The selection only ever holds ids that were checked on entry.
            Err(e) => unreachable!("session selection references unknown variant: {e:?}"),
        };
        let report = check_configuration(&self.model, &self.selection);
        StateBody {
            id: self.id,
            model: self.model.name.clone(),
            selected: self.selection.selected.iter().cloned().collect(),
            valid: report.is_valid(),
            decisions,
            report,
            created_at: self.created_at,
            updated_at: self.updated_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateBody {
    pub id: Uuid,
    pub model: String,
    pub selected: Vec<Ident>,
    pub valid: bool,
    pub decisions: DecisionState,
    pub report: ValidationReport,
    pub created_at: u64,
    pub updated_at: u64,
}

type SessionMap = HashMap<Uuid, Arc<RwLock<Session>>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<SessionMap>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    async fn session(&self, id: &str) -> Result<Arc<RwLock<Session>>, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::unknown_session(id))?;
        self.sessions
            .read()
            .await
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(&id.to_string()))
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }

    /// Writes every session as JSON.
    pub async fn save_snapshot(&self, path: &Path) -> std::io::Result<()> {
        let map = self.sessions.read().await;
        let mut all = Vec::with_capacity(map.len());
        for s in map.values() {
            all.push(s.read().await.clone());
        }
        all.sort_by_key(|s| (s.created_at, s.id));
        let text = serde_json::to_string_pretty(&all).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }

    /// Restores sessions written by [`AppState::save_snapshot`].
    pub fn load_snapshot(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let all: Vec<Session> = serde_json::from_str(&text).map_err(std::io::Error::other)?;
        let map: SessionMap = all
            .into_iter()
            .map(|s| (s.id, Arc::new(RwLock::new(s))))
            .collect();
        Ok(AppState {
            sessions: Arc::new(RwLock::new(map)),
        })
    }
}

/// Error payload: `{"error": {"code", "message", "diagnostics"?}}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": { "code": code, "message": message.into() } }),
        }
    }

    fn with_diagnostics(mut self, diagnostics: impl Serialize) -> Self {
        self.body["error"]["diagnostics"] =
            serde_json::to_value(diagnostics).unwrap_or(Value::Null);
        self
    }

    fn unknown_session(id: &str) -> Self {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "UNKNOWN_SESSION",
            format!("no session `{id}`"),
        )
    }

    fn bad_json(status: StatusCode, e: serde_json::Error) -> Self {
        ApiError::new(status, "INVALID_REQUEST", e.to_string())
    }

    fn from_compose(e: ComposeError) -> Self {
        let code = match e {
            ComposeError::InvalidConfiguration(_) => "INVALID_CONFIGURATION",
            _ => "COMPOSITION_CONFLICT",
        };
        let message = e.to_string();
        ApiError::new(StatusCode::CONFLICT, code, message).with_diagnostics(&e.report().diagnostics)
    }

    fn from_sim(e: SimError) -> Self {
        let status = match e {
            SimError::EmptyRun { .. } | SimError::InvalidSpec { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::CONFLICT,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Parses a JSON body; an empty body reads as `{}`.
fn body_json<T: for<'de> Deserialize<'de>>(
    body: &Bytes,
    status: StatusCode,
) -> Result<T, ApiError> {
    let slice: &[u8] = if body.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        body
    };
    serde_json::from_slice(slice).map_err(|e| ApiError::bad_json(status, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    builtin: Option<String>,
    source: Option<String>,
}

async fn builtins() -> Json<Value> {
    let list: Vec<Value> = builtin::BUILTINS
        .iter()
        .map(|name| {
            let m = builtin::by_name(name).expect("listed builtin");
            json!({
                "name": name,
                "variation_points": m.variation_points.iter().map(|vp| vp.id.as_str()).collect::<Vec<_>>(),
                "case_study": builtin::CASE_STUDY,
            })
        })
        .collect();
    Json(json!({ "builtins": list }))
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = body_json(&body, StatusCode::BAD_REQUEST)?;
    let model = match (req.builtin, req.source) {
        (Some(name), None) => builtin::by_name(&name).ok_or_else(|| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "UNKNOWN_BUILTIN",
                format!("no built-in model `{name}`"),
            )
        })?,
        (None, Some(src)) => {
            let parsed = parse_model_with("<request>", &src, &NoIncludes).map_err(|d| {
                ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "PARSE_ERROR",
                    "model source does not parse",
                )
                .with_diagnostics(d)
            })?;
            let report = validate_model(&parsed.model);
            if !report.is_valid() {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "INVALID_MODEL",
                    "model fails validation",
                )
                .with_diagnostics(&report.diagnostics));
            }
            parsed.model
        }
        _ => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "INVALID_REQUEST",
                "give exactly one of `builtin` or `source`",
            ))
        }
    };
    let session = Session::new(model);
    let state = session.state();
    app.sessions
        .write()
        .await
        .insert(session.id, Arc::new(RwLock::new(session)));
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

async fn get_state(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<StateBody>, ApiError> {
    let s = app.session(&id).await?;
    let s = s.read().await;
    Ok(Json(s.state()))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SelectionPatch {
    add: Vec<Ident>,
    remove: Vec<Ident>,
}

async fn update_selection(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<StateBody>, ApiError> {
    let s = app.session(&id).await?;
    let patch: SelectionPatch = body_json(&body, StatusCode::UNPROCESSABLE_ENTITY)?;
    let mut s = s.write().await;
    let unknown: Vec<&str> = patch
        .add
        .iter()
        .chain(&patch.remove)
        .filter(|v| s.model.variant(v).is_none())
        .map(Ident::as_str)
        .collect();
    if !unknown.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "UNKNOWN_VARIANT",
            format!("unknown variant id(s): {}", unknown.join(", ")),
        ));
    }
    let mut next = s.selection.clone();
    next.selected.extend(patch.add);
    for v in &patch.remove {
        next.selected.remove(v);
    }
    s.selection = next;
    s.updated_at = now();
    Ok(Json(s.state()))
}

/// Same bytes as `qkdvm compose --format json`.
async fn compose_endpoint(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let s = app.session(&id).await?;
    let (model, selection) = {
        let s = s.read().await;
        (s.model.clone(), s.selection.clone())
    };
    let arch = compose(&model, &selection).map_err(ApiError::from_compose)?;
    let text = export_architecture(&arch, ExportFormat::Json);
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

#[derive(Serialize)]
struct SimulateResponse {
    seed: u64,
    photon_count: u64,
    results: Vec<PathResult>,
}

async fn simulate_endpoint(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let s = app.session(&id).await?;
    let params: SimulationParams = body_json(&body, StatusCode::UNPROCESSABLE_ENTITY)?;
    let (model, selection) = {
        let s = s.read().await;
        (s.model.clone(), s.selection.clone())
    };
    let arch = compose(&model, &selection).map_err(ApiError::from_compose)?;
    let results = tokio::task::spawn_blocking(move || {
        simulate_architecture(&arch, &params).map(|r| (params, r))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string()))?;
    let (params, results) = results.map_err(ApiError::from_sim)?;
    let body = SimulateResponse {
        seed: params.seed,
        photon_count: params.photon_count,
        results,
    };
    Ok(Json(serde_json::to_value(body).expect("serializable")))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such endpoint")
}

pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/builtins", get(builtins))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/selection", patch(update_selection))
        .route("/sessions/{id}/compose", post(compose_endpoint))
        .route("/sessions/{id}/simulate", post(simulate_endpoint))
        .fallback(not_found)
        .with_state(state);
    let app = Router::new().nest("/api/v1", api);
    match ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    }
}
