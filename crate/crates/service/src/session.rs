use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use decompose_core::geometry::HullMesh;
use decompose_core::{
    exact_convex_hull, ColorCloud, ColorImage, HullResult, PaletteDocument,
};
use tokio::sync::Semaphore;
use uuid::Uuid;

use crate::config::Config;
use crate::jobs::Job;

/// One uploaded image and everything derived from it. The image never
/// changes, so the cloud and hull caches never need invalidating; a new
/// upload creates a new session.
pub struct Session {
    pub id: Uuid,
    pub image: Arc<ColorImage>,
    pub image_hash: String,
    pub cloud: Arc<ColorCloud>,
    exact_hull: OnceLock<Option<HullMesh>>,
    /// Serializes mutating requests (palette changes, job submission).
    pub ops: tokio::sync::Mutex<()>,
    pub state: Mutex<SessionState>,
}

#[derive(Default)]
pub struct SessionState {
    pub palette: Option<PaletteDocument>,
    pub jobs: HashMap<Uuid, Arc<Job>>,
    pub active_job: Option<Arc<Job>>,
}

impl SessionState {
    /// The queued or running job, if any.
    pub fn running_job(&self) -> Option<&Arc<Job>> {
        self.active_job.as_ref().filter(|j| !j.state().is_terminal())
    }
}

impl Session {
    pub fn new(image: ColorImage, cloud: ColorCloud) -> Self {
        Self {
            id: Uuid::new_v4(),
            image_hash: image.content_hash(),
            image: Arc::new(image),
            cloud: Arc::new(cloud),
            exact_hull: OnceLock::new(),
            ops: tokio::sync::Mutex::new(()),
            state: Mutex::new(SessionState::default()),
        }
    }

    /// Exact hull of the pixel colors, computed on first use. `None` when
    /// the colors do not span three dimensions.
    pub fn exact_hull(&self) -> Option<HullMesh> {
        self.exact_hull
            .get_or_init(|| match exact_convex_hull(&self.cloud) {
                Ok(HullResult::Full(poly)) => Some(poly.mesh()),
                _ => None,
            })
            .clone()
    }

    pub fn job(&self, id: Uuid) -> Option<Arc<Job>> {
        self.state.lock().unwrap().jobs.get(&id).cloned()
    }
}

pub struct AppStateInner {
    pub config: Config,
    pub sessions: RwLock<HashMap<Uuid, Arc<Session>>>,
    pub workers: Arc<Semaphore>,
}

#[derive(Clone)]
pub struct AppState(pub Arc<AppStateInner>);

impl AppState {
    pub fn new(config: Config) -> Self {
        let workers = Arc::new(Semaphore::new(config.workers.max(1)));
        Self(Arc::new(AppStateInner {
            config,
            sessions: RwLock::new(HashMap::new()),
            workers,
        }))
    }

    pub fn config(&self) -> &Config {
        &self.0.config
    }

    pub fn insert(&self, session: Session) -> Arc<Session> {
        let session = Arc::new(session);
        self.0
            .sessions
            .write()
            .unwrap()
            .insert(session.id, Arc::clone(&session));
        session
    }

    pub fn session(&self, id: Uuid) -> Option<Arc<Session>> {
        self.0.sessions.read().unwrap().get(&id).cloned()
    }

    pub fn session_dir(&self, id: Uuid) -> Option<PathBuf> {
        self.0
            .config
            .data_dir
            .as_ref()
            .map(|d| d.join("sessions").join(id.to_string()))
    }
}
