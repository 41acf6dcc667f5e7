use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::Html;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use ethkb_core::kb::KbDocument;
use ethkb_core::observation::Dataset;
use ethkb_core::{KbTree, Provenance};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};
use tower_http::services::ServeDir;

use crate::error::ServiceError;
use crate::registry::{TreeRegistry, TreeSummary};
use crate::session::{filtered_tree, Session, SessionEvent, SessionView};
use crate::store::EventStore;

struct Slot {
    session: Session,
    tree: Arc<KbTree>,
}

/// Shared service state. Each session has its own lock, so mutations of one
/// session are serialized while different sessions proceed independently.
pub struct AppState {
    registry: TreeRegistry,
    store: EventStore,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
}

impl AppState {
    /// Builds the state and replays every stored session log. Logs that no
    /// longer replay (tree removed or changed) are skipped with a warning.
    pub fn new(registry: TreeRegistry, store: EventStore) -> Result<Self, ServiceError> {
        let mut sessions = HashMap::new();
        for (id, events) in store.load_all()? {
            match restore(&registry, &events) {
                Ok(slot) => {
                    sessions.insert(id, Arc::new(Mutex::new(slot)));
                }
                Err(e) => tracing::warn!(session = %id, error = %e, "skipping session log"),
            }
        }
        if !sessions.is_empty() {
            tracing::info!(count = sessions.len(), "restored sessions");
        }
        Ok(AppState {
            registry,
            store,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn registry(&self) -> &TreeRegistry {
        &self.registry
    }

    async fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, ServiceError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    async fn mutate(
        &self,
        id: &str,
        event: impl FnOnce(DateTime<Utc>) -> SessionEvent,
    ) -> Result<SessionView, ServiceError> {
        let slot = self.slot(id).await?;
        let mut slot = slot.lock().await;
        let event = event(Utc::now());
        let mut next = slot.session.clone();
        next.apply(&slot.tree, &event)?;
        self.store.append(id, &event)?;
        slot.session = next;
        Ok(slot.session.view(&slot.tree))
    }
}

fn restore(registry: &TreeRegistry, events: &[SessionEvent]) -> Result<Slot, ServiceError> {
    let Some(SessionEvent::Created {
        tree_id,
        tree_version,
        filter,
        ..
    }) = events.first()
    else {
        return Err(ServiceError::BadRequest(
            "log does not start with a creation event".into(),
        ));
    };
    let base = registry.get(tree_id)?;
    if base.version() != tree_version {
        tracing::warn!(tree = %tree_id, logged = %tree_version, current = %base.version(), "tree version changed");
    }
    let tree = Arc::new(filtered_tree(tree_id, &base, filter)?);
    let session = Session::replay(&tree, events)?;
    Ok(Slot { session, tree })
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    pub tree_id: String,
    /// Allowed provenances; all when absent.
    #[serde(default)]
    pub filter: Option<BTreeSet<Provenance>>,
    #[serde(default)]
    pub subject_paper: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub branch_index: usize,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FindingRequest {
    #[serde(default)]
    pub annotation: Option<String>,
}

type Shared = Arc<AppState>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

async fn list_trees(State(state): State<Shared>) -> Json<Vec<TreeSummary>> {
    Json(state.registry.summaries())
}

async fn get_tree(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<KbDocument>, ServiceError> {
    Ok(Json(state.registry.get(&id)?.to_document()))
}

async fn create_session(
    State(state): State<Shared>,
    payload: Result<Json<CreateSessionRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ServiceError> {
    let req = body(payload)?;
    let base = state.registry.get(&req.tree_id)?;
    let filter = req
        .filter
        .unwrap_or_else(|| BTreeSet::from(Provenance::ALL));
    let tree = Arc::new(filtered_tree(&req.tree_id, &base, &filter)?);
    let id = uuid::Uuid::new_v4().simple().to_string();
    let created = SessionEvent::Created {
        session_id: id.clone(),
        tree_id: req.tree_id,
        tree_version: base.version().to_string(),
        filter,
        subject_paper: req.subject_paper,
        at: Utc::now(),
    };
    let session = Session::create(&created, &tree)?;
    state.store.append(&id, &created)?;
    let view = session.view(&tree);
    tracing::debug!(session = %id, tree = %session.tree_id, "session created");
    state
        .sessions
        .write()
        .await
        .insert(id, Arc::new(Mutex::new(Slot { session, tree })));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ServiceError> {
    let slot = state.slot(&id).await?;
    let slot = slot.lock().await;
    Ok(Json(slot.session.view(&slot.tree)))
}

async fn answer(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ServiceError> {
    let req = body(payload)?;
    let view = state
        .mutate(&id, |at| SessionEvent::Answered {
            branch_index: req.branch_index,
            at,
        })
        .await?;
    Ok(Json(view))
}

async fn step_back(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ServiceError> {
    Ok(Json(
        state
            .mutate(&id, |at| SessionEvent::SteppedBack { at })
            .await?,
    ))
}

/// The body is optional: an empty request records the finding without an
/// annotation.
async fn record_finding(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    raw: Bytes,
) -> Result<Json<SessionView>, ServiceError> {
    let req: FindingRequest = if raw.iter().all(u8::is_ascii_whitespace) {
        FindingRequest::default()
    } else {
        serde_json::from_slice(&raw).map_err(|e| ServiceError::BadRequest(e.to_string()))?
    };
    let view = state
        .mutate(&id, |at| SessionEvent::FindingRecorded {
            annotation: req.annotation,
            at,
        })
        .await?;
    Ok(Json(view))
}

async fn export(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Dataset>, ServiceError> {
    let slot = state.slot(&id).await?;
    let slot = slot.lock().await;
    Ok(Json(slot.session.export()))
}

const INDEX: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>ethkb walkthrough</title></head>
<body>
<h1>ethkb walkthrough service</h1>
<p>No UI assets are installed. Start the service with <code>--ui-dir</code> to serve them here.</p>
<ul>
<li>GET /trees</li><li>GET /trees/{id}</li><li>POST /sessions</li><li>GET /sessions/{id}</li>
<li>POST /sessions/{id}/answer</li><li>POST /sessions/{id}/back</li>
<li>POST /sessions/{id}/findings</li><li>GET /sessions/{id}/export</li>
</ul>
</body></html>
";

pub fn router(state: Arc<AppState>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/trees", get(list_trees))
        .route("/trees/{id}", get(get_tree))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/back", post(step_back))
        .route("/sessions/{id}/findings", post(record_finding))
        .route("/sessions/{id}/export", get(export))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX) })),
    }
}
