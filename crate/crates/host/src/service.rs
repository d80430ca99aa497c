//! HTTP + websocket front end over [`Session`]s.
//!
//! Every session sits behind its own async mutex, which is the single-writer
//! command queue: a command is applied, its delta is broadcast, and only then
//! is the next command admitted. Subscribers receive a snapshot first and then
//! every later delta in commit order.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use assistvr_core::nlu::Lexicon;
use assistvr_core::session::{Command, Session, SessionError, SessionParams, StateDelta, TrialVerb};
use assistvr_core::trial::{TrialPhase, COUNTDOWN_MS};
use assistvr_core::{Vec2, Vec3, SCHEMA_VERSION};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast;

use crate::records::RecordLog;

/// Milliseconds for session timestamps.
#[derive(Clone)]
pub enum Clock {
    Wall(Instant),
    /// Set by hand; for tests and scripted clients.
    Manual(Arc<AtomicU64>),
}

impl Clock {
    pub fn now_ms(&self) -> u64 {
        match self {
            Clock::Wall(start) => start.elapsed().as_millis() as u64,
            Clock::Manual(t) => t.load(Ordering::SeqCst),
        }
    }
}

struct Slot {
    session: tokio::sync::Mutex<Session>,
    tx: broadcast::Sender<StateDelta>,
}

struct Inner {
    lexicon: Arc<Lexicon>,
    sessions: Mutex<HashMap<u64, Arc<Slot>>>,
    next_id: AtomicU64,
    clock: Clock,
    log: Option<Mutex<RecordLog>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(lexicon: Lexicon, clock: Clock) -> AppState {
        AppState(Arc::new(Inner {
            lexicon: Arc::new(lexicon),
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            clock,
            log: None,
        }))
    }

    /// Also append every finished trial to a record log.
    pub fn with_record_log(lexicon: Lexicon, clock: Clock, path: &Path) -> std::io::Result<AppState> {
        let log = RecordLog::open_append(path)?;
        let mut state = AppState::new(lexicon, clock);
        Arc::get_mut(&mut state.0).expect("fresh state").log = Some(Mutex::new(log));
        Ok(state)
    }

    fn slot(&self, id: u64) -> Result<Arc<Slot>, ApiError> {
        self.0
            .sessions
            .lock()
            .expect("session table poisoned")
            .get(&id)
            .cloned()
            .ok_or(ApiError(SessionError::NoSuchSession(id)))
    }

    pub fn create(&self, params: &SessionParams) -> Result<(u64, StateDelta), SessionError> {
        let id = self.0.next_id.fetch_add(1, Ordering::SeqCst);
        let session = Session::new(id, params, Arc::clone(&self.0.lexicon))?;
        let snapshot = session.snapshot(self.0.clock.now_ms());
        let (tx, _) = broadcast::channel(256);
        let slot = Arc::new(Slot {
            session: tokio::sync::Mutex::new(session),
            tx,
        });
        self.0.sessions.lock().expect("session table poisoned").insert(id, slot);
        Ok((id, snapshot))
    }

    /// Applies one command through the session's queue and broadcasts the
    /// resulting delta.
    pub async fn submit(&self, id: u64, cmd: Command) -> Result<StateDelta, SessionError> {
        let slot = self.slot(id).map_err(|e| e.0)?;
        let mut session = slot.session.lock().await;
        let logged = session.records().len();
        let delta = session.apply(&cmd, self.0.clock.now_ms())?;
        self.log_new(&session, logged);
        let _ = slot.tx.send(delta.clone());
        drop(session);
        if cmd == (Command::Trial { verb: TrialVerb::Start }) && matches!(self.0.clock, Clock::Wall(_)) {
            self.spawn_countdown(slot);
        }
        Ok(delta)
    }

    fn log_new(&self, session: &Session, from: usize) {
        if let Some(log) = &self.0.log {
            let mut log = log.lock().expect("record log poisoned");
            for r in &session.records()[from..] {
                if let Err(e) = log.append(r) {
                    tracing::error!("record log write failed: {e}");
                }
            }
        }
    }

    /// Emits the countdown-end delta without waiting for the next command.
    fn spawn_countdown(&self, slot: Arc<Slot>) {
        let clock = self.0.clock.clone();
        tokio::spawn(async move {
            tokio::time::sleep(Duration::from_millis(COUNTDOWN_MS)).await;
            for _ in 0..50 {
                let mut session = slot.session.lock().await;
                if let Some(delta) = session.tick(clock.now_ms()) {
                    let _ = slot.tx.send(delta);
                    return;
                }
                if !matches!(session.phase(), TrialPhase::Countdown { .. }) {
                    return;
                }
                drop(session);
                tokio::time::sleep(Duration::from_millis(10)).await;
            }
        });
    }

    /// Closes a session. A running trial is saved as aborted.
    pub async fn close(&self, id: u64) -> Result<(), SessionError> {
        let slot = self.slot(id).map_err(|e| e.0)?;
        let mut session = slot.session.lock().await;
        let logged = session.records().len();
        if session.cursor().is_some() && !matches!(session.phase(), TrialPhase::Completed | TrialPhase::Aborted) {
            if let Ok(delta) = session.apply(&Command::Trial { verb: TrialVerb::Abort }, self.0.clock.now_ms()) {
                let _ = slot.tx.send(delta);
            }
        }
        self.log_new(&session, logged);
        self.0.sessions.lock().expect("session table poisoned").remove(&id);
        Ok(())
    }
}

/// Session errors rendered as `{"v":1,"error":code,"message":text}`.
#[derive(Debug)]
pub struct ApiError(pub SessionError);

impl ApiError {
    fn parts(&self) -> (StatusCode, &'static str) {
        match &self.0 {
            SessionError::BadParams(_) => (StatusCode::BAD_REQUEST, "bad_params"),
            SessionError::NoSuchSession(_) => (StatusCode::NOT_FOUND, "no_such_session"),
            SessionError::TrialNotActive(_) => (StatusCode::CONFLICT, "trial_not_active"),
            SessionError::WrongTechnique { .. } => (StatusCode::CONFLICT, "wrong_technique"),
            SessionError::IllegalPhase { .. } => (StatusCode::CONFLICT, "illegal_phase"),
            SessionError::InvalidRay => (StatusCode::BAD_REQUEST, "invalid_ray"),
            SessionError::NoMinimap => (StatusCode::CONFLICT, "no_minimap"),
            SessionError::Minimap(_) => (StatusCode::UNPROCESSABLE_ENTITY, "minimap"),
            SessionError::Scene(_) => (StatusCode::INTERNAL_SERVER_ERROR, "scene"),
        }
    }

    pub fn body(&self) -> Value {
        json!({"v": SCHEMA_VERSION, "error": self.parts().1, "message": self.0.to_string()})
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.parts().0, Json(self.body())).into_response()
    }
}

#[derive(Deserialize)]
struct UtteranceBody {
    text: String,
}

#[derive(Deserialize)]
struct RayBody {
    origin: Vec3,
    direction: Vec3,
}

#[derive(Deserialize)]
struct MinimapBody {
    origin: Vec3,
    direction: Vec3,
    #[serde(default)]
    half_angle: Option<f64>,
}

#[derive(Deserialize)]
struct PickBody {
    point: Vec2,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(close_session))
        .route("/sessions/{id}/scene", get(get_scene))
        .route("/sessions/{id}/utterance", post(post_utterance))
        .route("/sessions/{id}/ray", post(post_ray))
        .route("/sessions/{id}/minimap", post(post_minimap))
        .route("/sessions/{id}/map-pick", post(post_map_pick))
        .route("/sessions/{id}/trial/{verb}", post(post_trial))
        .route("/sessions/{id}/records", get(get_records))
        .route("/sessions/{id}/stream", get(stream))
        .with_state(state)
}

async fn create_session(
    State(state): State<AppState>,
    Json(params): Json<SessionParams>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let (id, snapshot) = state.create(&params)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({"v": SCHEMA_VERSION, "session": id, "state": snapshot})),
    ))
}

async fn close_session(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> Result<StatusCode, ApiError> {
    state.close(id).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_scene(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> Result<Json<Value>, ApiError> {
    let slot = state.slot(id)?;
    let session = slot.session.lock().await;
    let arena = session.arena();
    Ok(Json(json!({
        "v": SCHEMA_VERSION,
        "session": id,
        "seq": session.seq(),
        "technique": arena.technique,
        "scene": arena.scene,
        "selected": arena.selection.selected(),
        "minimap": arena.layout,
    })))
}

async fn post_utterance(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    Json(body): Json<UtteranceBody>,
) -> Result<Json<StateDelta>, ApiError> {
    Ok(Json(state.submit(id, Command::Utterance { text: body.text }).await?))
}

async fn post_ray(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    Json(body): Json<RayBody>,
) -> Result<Json<StateDelta>, ApiError> {
    let cmd = Command::Ray {
        origin: body.origin,
        direction: body.direction,
    };
    Ok(Json(state.submit(id, cmd).await?))
}

async fn post_minimap(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    Json(body): Json<MinimapBody>,
) -> Result<Json<StateDelta>, ApiError> {
    let cmd = Command::OpenMinimap {
        origin: body.origin,
        direction: body.direction,
        half_angle: body.half_angle,
    };
    Ok(Json(state.submit(id, cmd).await?))
}

async fn post_map_pick(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    Json(body): Json<PickBody>,
) -> Result<Json<StateDelta>, ApiError> {
    Ok(Json(state.submit(id, Command::MapPick { point: body.point }).await?))
}

async fn post_trial(
    State(state): State<AppState>,
    UrlPath((id, verb)): UrlPath<(u64, String)>,
) -> Result<Json<StateDelta>, Response> {
    let Ok(verb) = verb.parse::<TrialVerb>() else {
        let body = json!({"v": SCHEMA_VERSION, "error": "unknown_verb", "message": format!("unknown trial verb `{verb}`")});
        return Err((StatusCode::NOT_FOUND, Json(body)).into_response());
    };
    state
        .submit(id, Command::Trial { verb })
        .await
        .map(Json)
        .map_err(|e| ApiError(e).into_response())
}

async fn get_records(State(state): State<AppState>, UrlPath(id): UrlPath<u64>) -> Result<Json<Value>, ApiError> {
    let slot = state.slot(id)?;
    let session = slot.session.lock().await;
    Ok(Json(json!({"v": SCHEMA_VERSION, "session": id, "records": session.records()})))
}

async fn stream(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u64>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let slot = state.slot(id)?;
    Ok(ws.on_upgrade(move |socket| serve_socket(state, id, slot, socket)))
}

async fn subscribe(state: &AppState, slot: &Slot) -> (StateDelta, broadcast::Receiver<StateDelta>) {
    // Subscribing under the session lock means no delta falls between the
    // snapshot and the first streamed delta.
    let session = slot.session.lock().await;
    let rx = slot.tx.subscribe();
    (session.snapshot(state.0.clock.now_ms()), rx)
}

fn to_text(v: &impl serde::Serialize) -> Message {
    Message::Text(serde_json::to_string(v).expect("serializable").into())
}

async fn serve_socket(state: AppState, id: u64, slot: Arc<Slot>, mut socket: WebSocket) {
    let (snapshot, mut rx) = subscribe(&state, &slot).await;
    if socket.send(to_text(&snapshot)).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            delta = rx.recv() => match delta {
                Ok(d) => {
                    if socket.send(to_text(&d)).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(_)) => {
                    let (snapshot, fresh) = subscribe(&state, &slot).await;
                    rx = fresh;
                    if socket.send(to_text(&snapshot)).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Closed) => return,
            },
            msg = socket.recv() => match msg {
                Some(Ok(Message::Text(text))) => {
                    let reply = match serde_json::from_str::<Command>(&text) {
                        // The delta itself arrives through the broadcast.
                        Ok(cmd) => state.submit(id, cmd).await.err().map(|e| ApiError(e).body()),
                        Err(e) => Some(json!({"v": SCHEMA_VERSION, "error": "bad_command", "message": e.to_string()})),
                    };
                    if let Some(body) = reply {
                        if socket.send(to_text(&body)).await.is_err() {
                            return;
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await
}
