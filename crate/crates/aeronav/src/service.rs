//! HTTP control service: sessions over the episode engine for the
//! teleoperation console and external drivers.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use aeronav_core::baselines::{ActionSamplingPolicy, RandomPolicy};
use aeronav_core::camera::Entity;
use aeronav_core::episode::{EpisodeConfig, EpisodeLog, EpisodeStepper, Outcome};
use aeronav_core::metrics::progress_curve;
use aeronav_core::policy::{Decision, Policy};
use aeronav_core::scenario::{reference_oracle, Scenario, SCHEMA_VERSION};
use aeronav_core::{Action, AgentPose, CameraPose};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use crate::runner::episode_seed;
use crate::store::{write_episode_log, Corpus, Manifest, ManifestEntry, StoreError};
use crate::svg::schematic_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    Human,
    Policy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Done,
}

/// Local policies a policy-mode session may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalPolicy {
    Oracle,
    Random,
    Sampling,
}

struct Session {
    id: String,
    mode: SessionMode,
    stepper: EpisodeStepper,
    policy: Option<Box<dyn Policy + Send>>,
}

impl Session {
    fn status(&self) -> SessionStatus {
        if self.stepper.is_finished() {
            SessionStatus::Done
        } else {
            SessionStatus::Active
        }
    }

    fn summary(&self) -> SessionSummary {
        let log = self.stepper.log();
        SessionSummary {
            session_id: self.id.clone(),
            scenario_id: log.scenario_id.clone(),
            mode: self.mode,
            pose: self.stepper.pose(),
            step_count: self.stepper.step_count(),
            status: self.status(),
            outcome: self.stepper.outcome(),
            distance_to_goal: log.steps.last().map_or(log.initial_distance, |s| s.distance_to_goal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub scenario_id: String,
    pub mode: SessionMode,
    pub pose: AgentPose,
    pub step_count: u32,
    pub status: SessionStatus,
    pub outcome: Option<Outcome>,
    pub distance_to_goal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub scenario_id: String,
    pub mode: SessionMode,
    #[serde(default)]
    pub policy: Option<LocalPolicy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub scenario_id: String,
    pub instruction: String,
    pub epsilon: f64,
    pub mode: SessionMode,
    pub max_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationView {
    pub step: u32,
    pub entities: Vec<Entity>,
    pub camera_pose: CameraPose,
    pub schematic_svg: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRequest {
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResult {
    pub step: u32,
    pub action: Action,
    pub pose: AgentPose,
    pub blocked: bool,
    pub distance_to_goal: f64,
    pub status: SessionStatus,
    pub outcome: Option<Outcome>,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressPoint {
    pub step: usize,
    pub r_t: f64,
    pub completion_pct: f64,
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    Unprocessable(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (code, msg) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (code, Json(json!({ "error": msg }))).into_response()
    }
}

pub struct ServiceState {
    scenarios: BTreeMap<String, Scenario>,
    manifest: Manifest,
    episode: EpisodeConfig,
    log_dir: Option<PathBuf>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl ServiceState {
    pub fn new(scenarios: Vec<Scenario>, episode: EpisodeConfig) -> Self {
        let manifest = Manifest {
            version: SCHEMA_VERSION,
            scenarios: scenarios
                .iter()
                .map(|s| ManifestEntry {
                    id: s.id.clone(),
                    group: s.meta.group,
                    file: format!("{}/{}.json", crate::store::SCENARIO_DIR, s.id),
                    ground_truth_length: s.ground_truth.length,
                    instruction: s.goal.instruction.clone(),
                })
                .collect(),
        };
        Self {
            scenarios: scenarios.into_iter().map(|s| (s.id.clone(), s)).collect(),
            manifest,
            episode,
            log_dir: None,
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn from_corpus(corpus: &Corpus, episode: EpisodeConfig) -> Result<Self, StoreError> {
        let mut state = Self::new(corpus.load_all()?, episode);
        state.manifest = corpus.manifest().clone();
        Ok(state)
    }

    /// Finished sessions are written to `<dir>/<session_id>.jsonl`.
    pub fn with_log_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.log_dir = Some(dir.into());
        self
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("unknown session `{id}`")))
    }

    fn flush(&self, session: &Session) {
        if let (Some(dir), true) = (&self.log_dir, session.stepper.is_finished()) {
            let path = dir.join(format!("{}.jsonl", session.id));
            if let Err(e) = write_episode_log(&path, session.stepper.log()) {
                eprintln!("could not write {}: {e}", path.display());
            }
        }
    }
}

pub type SharedState = Arc<ServiceState>;

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/scenarios", get(list_scenarios))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/observation", get(observation))
        .route("/sessions/{id}/action", post(act))
        .route("/sessions/{id}/step", post(step_policy))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/progress", get(progress))
        .layer(CorsLayer::very_permissive())
        .with_state(state)
}

async fn list_scenarios(State(s): State<SharedState>) -> Json<Manifest> {
    Json(s.manifest.clone())
}

async fn list_sessions(State(s): State<SharedState>) -> Json<Vec<SessionSummary>> {
    let sessions: Vec<_> = s.sessions.lock().unwrap().values().cloned().collect();
    let mut out: Vec<SessionSummary> = sessions.iter().map(|x| x.lock().unwrap().summary()).collect();
    out.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    Json(out)
}

fn local_policy(kind: LocalPolicy, scenario: &Scenario, cfg: &EpisodeConfig) -> Result<Box<dyn Policy + Send>, ApiError> {
    let seed = episode_seed(cfg.seed, scenario);
    Ok(match kind {
        LocalPolicy::Random => Box::new(RandomPolicy::new(seed)),
        LocalPolicy::Sampling => Box::new(ActionSamplingPolicy::new(seed)),
        LocalPolicy::Oracle => Box::new(
            reference_oracle(&scenario.world, scenario.goal.position, &cfg.motion)
                .map_err(|e| ApiError::Unprocessable(e.to_string()))?,
        ),
    })
}

async fn create_session(
    State(s): State<SharedState>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let scenario = s
        .scenarios
        .get(&req.scenario_id)
        .ok_or_else(|| ApiError::NotFound(format!("unknown scenario `{}`", req.scenario_id)))?;
    let (policy, name) = match (req.mode, req.policy) {
        (SessionMode::Human, None) => (None, "human"),
        (SessionMode::Human, Some(_)) => {
            return Err(ApiError::Unprocessable("human sessions take no policy".into()));
        }
        (SessionMode::Policy, kind) => {
            let kind = kind.unwrap_or(LocalPolicy::Oracle);
            let mut p = local_policy(kind, scenario, &s.episode)?;
            let stepper = EpisodeStepper::new(scenario, p.name(), &s.episode);
            p.reset(&scenario.goal.instruction, &stepper.observation())
                .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
            (Some(p), "policy")
        }
    };
    let id = format!("s{:06}", s.next_id.fetch_add(1, Ordering::Relaxed));
    let stepper_name = policy.as_ref().map_or(name, |p| p.name()).to_string();
    let session = Session {
        id: id.clone(),
        mode: req.mode,
        stepper: EpisodeStepper::new(scenario, &stepper_name, &s.episode),
        policy,
    };
    s.sessions.lock().unwrap().insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((
        StatusCode::CREATED,
        Json(Created {
            session_id: id,
            scenario_id: scenario.id.clone(),
            instruction: scenario.goal.instruction.clone(),
            epsilon: s.episode.epsilon_for(scenario),
            mode: req.mode,
            max_steps: s.episode.max_steps,
        }),
    ))
}

async fn get_session(State(s): State<SharedState>, Path(id): Path<String>) -> Result<Json<SessionSummary>, ApiError> {
    let session = s.session(&id)?;
    let summary = session.lock().unwrap().summary();
    Ok(Json(summary))
}

async fn observation(State(s): State<SharedState>, Path(id): Path<String>) -> Result<Json<ObservationView>, ApiError> {
    let session = s.session(&id)?;
    let obs = session.lock().unwrap().stepper.observation();
    Ok(Json(ObservationView {
        step: obs.step,
        schematic_svg: schematic_svg(&obs, &s.episode.intrinsics),
        entities: obs.entities,
        camera_pose: obs.camera_pose,
    }))
}

fn apply(state: &ServiceState, session: &mut Session, decision: Decision) -> Result<ActionResult, ApiError> {
    let action = decision.action;
    let rec = session
        .stepper
        .apply(decision)
        .map_err(|e| ApiError::Conflict(e.to_string()))?
        .clone();
    state.flush(session);
    Ok(ActionResult {
        step: session.stepper.step_count(),
        action,
        pose: rec.pose,
        blocked: rec.blocked,
        distance_to_goal: rec.distance_to_goal,
        status: session.status(),
        outcome: session.stepper.outcome(),
        rationale: rec.rationale,
    })
}

async fn act(
    State(s): State<SharedState>,
    Path(id): Path<String>,
    Json(req): Json<ActionRequest>,
) -> Result<Json<ActionResult>, ApiError> {
    let session = s.session(&id)?;
    let action =
        Action::from_name(&req.kind).ok_or_else(|| ApiError::Unprocessable(format!("unknown action kind `{}`", req.kind)))?;
    let mut guard = session.lock().unwrap();
    if guard.stepper.is_finished() {
        return Err(ApiError::Conflict(format!("session `{id}` is done")));
    }
    if guard.mode == SessionMode::Policy {
        return Err(ApiError::Conflict(format!("session `{id}` is policy-driven; use /step")));
    }
    apply(&s, &mut guard, Decision::new(action, "human"))
        .map(Json)
}

async fn step_policy(State(s): State<SharedState>, Path(id): Path<String>) -> Result<Json<ActionResult>, ApiError> {
    let session = s.session(&id)?;
    let mut guard = session.lock().unwrap();
    if guard.stepper.is_finished() {
        return Err(ApiError::Conflict(format!("session `{id}` is done")));
    }
    let obs = guard.stepper.observation();
    let decision = match guard.policy.as_mut() {
        None => return Err(ApiError::Conflict(format!("session `{id}` is human-driven; use /action"))),
        Some(p) => p.next_action(&obs),
    };
    match decision {
        Ok(d) => apply(&s, &mut guard, d).map(Json),
        Err(e) => {
            guard.stepper.abort(e.to_string());
            s.flush(&guard);
            Err(ApiError::Internal(e.to_string()))
        }
    }
}

async fn log(State(s): State<SharedState>, Path(id): Path<String>) -> Result<Json<EpisodeLog>, ApiError> {
    let session = s.session(&id)?;
    let log = session.lock().unwrap().stepper.log().clone();
    Ok(Json(log))
}

async fn progress(State(s): State<SharedState>, Path(id): Path<String>) -> Result<Json<Vec<ProgressPoint>>, ApiError> {
    let session = s.session(&id)?;
    let log = session.lock().unwrap().stepper.log().clone();
    let ratios = progress_curve(&log).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
    Ok(Json(
        ratios
            .into_iter()
            .enumerate()
            .map(|(step, r_t)| ProgressPoint {
                step,
                r_t,
                completion_pct: 100.0 * (1.0 - r_t),
            })
            .collect(),
    ))
}

/// Binds `addr` and serves until the process is interrupted. Static UI
/// assets are served from `static_dir` under `/` when given.
pub async fn serve(state: SharedState, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let mut app = router(state);
    if let Some(dir) = static_dir {
        app = app.fallback_service(tower_http::services::ServeDir::new(dir));
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
