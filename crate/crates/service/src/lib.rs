//! HTTP facade over exploration sessions.
//!
//! Datasets are immutable once loaded and shared by sessions. Each session
//! fixes its strategy at creation; requests on one session are serialized,
//! requests on different sessions run concurrently.

mod api;
mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use provex::engine::Database;
use provex::explore::Session;
use tower_http::services::ServeDir;

pub use error::ApiError;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:7878";
pub const LISTEN_ENV: &str = "PROVEX_LISTEN";
pub const DEFAULT_IDLE: Duration = Duration::from_secs(30 * 60);
const MAX_UPLOAD: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    /// Sessions untouched for this long are dropped.
    pub idle: Duration,
    /// Static assets served under `/ui`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            idle: DEFAULT_IDLE,
            ui_dir: None,
        }
    }
}

pub(crate) struct Entry {
    pub session: Session,
    pub dataset: String,
    pub last_used: Instant,
}

pub(crate) type SessionSlot = Arc<tokio::sync::Mutex<Entry>>;

#[derive(Clone)]
pub struct AppState {
    pub(crate) datasets: Arc<Mutex<HashMap<String, Arc<Database>>>>,
    pub(crate) sessions: Arc<Mutex<HashMap<String, SessionSlot>>>,
    pub(crate) idle: Duration,
}

impl AppState {
    pub fn new(idle: Duration) -> AppState {
        AppState {
            datasets: Arc::default(),
            sessions: Arc::default(),
            idle,
        }
    }

    /// Registers a dataset and returns its id.
    pub fn add_dataset(&self, db: Database) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.datasets.lock().unwrap().insert(id.clone(), Arc::new(db));
        id
    }

    pub(crate) fn dataset(&self, id: &str) -> Result<Arc<Database>, ApiError> {
        self.datasets
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("dataset", id))
    }

    pub(crate) fn session(&self, id: &str) -> Result<SessionSlot, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    /// Drops idle sessions; sessions with a request in flight are kept.
    pub fn evict_idle(&self) -> usize {
        let mut sessions = self.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, slot| match slot.try_lock() {
            Ok(entry) => entry.last_used.elapsed() < self.idle,
            Err(_) => true,
        });
        before - sessions.len()
    }
}

pub fn router(state: AppState, config: &Config) -> Router {
    let mut app = Router::new()
        .route("/datasets", post(api::upload_dataset).layer(DefaultBodyLimit::max(MAX_UPLOAD)))
        .route("/datasets/fixture", post(api::fixture_dataset))
        .route("/sessions", post(api::create_session))
        .route("/sessions/{id}", get(api::get_session).delete(api::delete_session))
        .route("/sessions/{id}/selection", post(api::select))
        .route("/sessions/{id}/provenance/{occurrence}", get(api::get_provenance))
        .route("/sessions/{id}/occurrences", get(api::list_occurrences))
        .route("/sessions/{id}/plan", get(api::get_plan))
        .with_state(state);
    if let Some(dir) = &config.ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app
}

/// `flag`, else `$PROVEX_LISTEN`, else the default address.
pub fn listen_address(flag: Option<&str>) -> String {
    flag.map(str::to_string)
        .or_else(|| std::env::var(LISTEN_ENV).ok().filter(|s| !s.trim().is_empty()))
        .unwrap_or_else(|| DEFAULT_LISTEN.to_string())
}

/// Serves until the process is stopped, sweeping idle sessions every minute.
pub async fn serve(addr: SocketAddr, config: Config) -> std::io::Result<()> {
    let state = AppState::new(config.idle);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60).min(sweeper.idle.max(Duration::from_secs(1))));
        loop {
            tick.tick().await;
            sweeper.evict_idle();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state, &config)).await
}
