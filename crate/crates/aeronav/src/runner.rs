//! Batch execution of a policy over a corpus into a run directory.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use aeronav_core::baselines::{ActionSamplingPolicy, RandomPolicy};
use aeronav_core::enhancements::{SparseMemoryConfig, DEFAULT_DEAD_ZONE, DEFAULT_MAX_ITERS};
use aeronav_core::episode::{run_episode, EpisodeConfig, EpisodeLog, EpisodeStepper};
use aeronav_core::policy::{Policy, MEMORY_WINDOW};
use aeronav_core::scenario::{reference_oracle, Scenario};
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentConfig, Enhancements};
use crate::gateway::{Gateway, GatewayHandle, HttpBackend, HttpConfig, LedgerSnapshot};
use crate::lmm_policy::LanguagePolicy;
use crate::prompts::PromptSet;
use crate::store::{read_json, write_episode_log, write_json, Corpus, RunDir, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    Sampling,
    Oracle,
    Lmm,
    Agent,
}

impl PolicyKind {
    pub fn needs_gateway(self) -> bool {
        matches!(self, PolicyKind::Lmm | PolicyKind::Agent)
    }
}

/// Where model calls go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GatewaySpec {
    Live,
    /// Live calls, each persisted as a fixture under the path.
    Record(PathBuf),
    /// Fixtures only; a missing fixture is an error.
    Replay(PathBuf),
}

impl GatewaySpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "live" => Ok(GatewaySpec::Live),
            Some(("replay", p)) if !p.is_empty() => Ok(GatewaySpec::Replay(p.into())),
            Some(("record", p)) if !p.is_empty() => Ok(GatewaySpec::Record(p.into())),
            _ => Err(format!("invalid gateway `{s}`: expected live, replay:PATH or record:PATH")),
        }
    }

    pub fn is_live(&self) -> bool {
        !matches!(self, GatewaySpec::Replay(_))
    }

    pub fn build(&self, model: &str) -> Result<GatewayHandle, RunError> {
        let model = if model.is_empty() {
            std::env::var(crate::gateway::ENV_MODEL).unwrap_or_default()
        } else {
            model.to_string()
        };
        let live = || -> Result<Arc<HttpBackend>, RunError> {
            let mut cfg = HttpConfig::from_env().map_err(|e| RunError::Config(e.to_string()))?;
            if !model.is_empty() {
                cfg.model = model.clone();
            }
            Ok(Arc::new(HttpBackend::new(cfg)))
        };
        let gw = match self {
            GatewaySpec::Live => Gateway::live(model.clone(), live()?),
            GatewaySpec::Record(p) => Gateway::record(model.clone(), live()?, p.clone()),
            GatewaySpec::Replay(p) => Gateway::strict_replay(model.clone(), p.clone()),
        };
        Ok(gw.into_handle())
    }
}

impl std::fmt::Display for GatewaySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GatewaySpec::Live => f.write_str("live"),
            GatewaySpec::Record(p) => write!(f, "record:{}", p.display()),
            GatewaySpec::Replay(p) => write!(f, "replay:{}", p.display()),
        }
    }
}

/// Everything a run needs; also the `config.json` snapshot. Config files
/// use the same keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub policy: PolicyKind,
    pub enhancements: Vec<String>,
    pub gateway: String,
    pub model: String,
    pub prompts: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub resume: bool,
    pub max_steps: u32,
    pub epsilon: f64,
    pub seed: u64,
    pub window: usize,
    pub dead_zone: f64,
    pub max_iters: usize,
    pub sparse: SparseMemoryConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ep = EpisodeConfig::default();
        Self {
            corpus: PathBuf::from("corpus"),
            out: PathBuf::from("run"),
            policy: PolicyKind::Oracle,
            enhancements: Vec::new(),
            gateway: String::from("live"),
            model: String::new(),
            prompts: None,
            jobs: None,
            resume: false,
            max_steps: ep.max_steps,
            epsilon: ep.epsilon,
            seed: ep.seed,
            window: MEMORY_WINDOW,
            dead_zone: DEFAULT_DEAD_ZONE,
            max_iters: DEFAULT_MAX_ITERS,
            sparse: SparseMemoryConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn episode(&self) -> EpisodeConfig {
        EpisodeConfig {
            max_steps: self.max_steps,
            epsilon: self.epsilon,
            seed: self.seed,
            ..EpisodeConfig::default()
        }
    }

    pub fn agent(&self) -> Result<AgentConfig, RunError> {
        let enhancements = Enhancements::parse(&self.enhancements.join(",")).map_err(RunError::Config)?;
        let ep = self.episode();
        Ok(AgentConfig {
            enhancements,
            window: self.window,
            dead_zone: self.dead_zone,
            max_iters: self.max_iters,
            sparse: self.sparse,
            motion: ep.motion,
            intrinsics: ep.intrinsics,
        })
    }

    pub fn gateway_spec(&self) -> Result<GatewaySpec, RunError> {
        GatewaySpec::parse(&self.gateway).map_err(RunError::Config)
    }

    /// Parallel episodes: the explicit value, else 1 for live gateways and
    /// the machine's parallelism otherwise.
    pub fn effective_jobs(&self) -> usize {
        if let Some(j) = self.jobs {
            return j.max(1);
        }
        let live = self.policy.needs_gateway() && self.gateway_spec().map_or(true, |g| g.is_live());
        if live {
            1
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.episode()
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        self.agent()?;
        if self.policy.needs_gateway() {
            self.gateway_spec()?;
        }
        if self.window < 2 {
            return Err(RunError::Config("window must be at least 2".into()));
        }
        if self.max_iters == 0 {
            return Err(RunError::Config("max_iters must be at least 1".into()));
        }
        if !self.sparse.is_valid() {
            return Err(RunError::Config("sparse memory config out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Per-episode seed, independent of scheduling order.
pub fn episode_seed(run_seed: u64, scenario: &Scenario) -> u64 {
    let id_hash = scenario
        .id
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    run_seed ^ id_hash ^ scenario.meta.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17)
}

/// Shared state for building policies across episodes.
pub struct PolicyFactory {
    pub kind: PolicyKind,
    pub gateway: Option<GatewayHandle>,
    pub prompts: Arc<PromptSet>,
    pub agent: AgentConfig,
}

impl PolicyFactory {
    pub fn build(&self, scenario: &Scenario, cfg: &EpisodeConfig) -> Result<Box<dyn Policy + Send>, String> {
        let seed = episode_seed(cfg.seed, scenario);
        let gateway = || self.gateway.clone().ok_or_else(|| String::from("policy needs a gateway"));
        Ok(match self.kind {
            PolicyKind::Random => Box::new(RandomPolicy::new(seed)),
            PolicyKind::Sampling => Box::new(ActionSamplingPolicy::new(seed)),
            PolicyKind::Oracle => Box::new(
                reference_oracle(&scenario.world, scenario.goal.position, &cfg.motion).map_err(|e| e.to_string())?,
            ),
            PolicyKind::Lmm => Box::new(LanguagePolicy::new(gateway()?, self.prompts.clone())),
            PolicyKind::Agent => Box::new(Agent::new(
                gateway()?,
                self.prompts.clone(),
                Arc::new(scenario.world.clone()),
                self.agent,
            )),
        })
    }

    pub fn policy_name(&self) -> &'static str {
        match self.kind {
            PolicyKind::Random => "random",
            PolicyKind::Sampling => "sampling",
            PolicyKind::Oracle => "oracle",
            PolicyKind::Lmm => "lmm",
            PolicyKind::Agent => "agent",
        }
    }

    /// Runs one episode; a policy that cannot be built yields an aborted log.
    pub fn run(&self, scenario: &Scenario, cfg: &EpisodeConfig) -> EpisodeLog {
        match self.build(scenario, cfg) {
            Ok(mut p) => run_episode(scenario, &mut p, cfg),
            Err(reason) => {
                let mut stepper = EpisodeStepper::new(scenario, self.policy_name(), cfg);
                stepper.abort(reason);
                stepper.into_log()
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub completed: usize,
    pub skipped: usize,
    pub successes: usize,
    pub errors: usize,
}

/// Runs every scenario of `corpus` not already finished (with `resume`).
pub fn run_corpus(cfg: &RunConfig, corpus: &Corpus) -> Result<RunSummary, RunError> {
    run_corpus_with(cfg, corpus, None)
}

/// Like [`run_corpus`] but with a caller-provided gateway.
pub fn run_corpus_with(cfg: &RunConfig, corpus: &Corpus, gateway: Option<GatewayHandle>) -> Result<RunSummary, RunError> {
    cfg.validate()?;
    let run_dir = RunDir::new(&cfg.out);
    std::fs::create_dir_all(run_dir.root()).map_err(|source| StoreError::Io {
        path: run_dir.root().to_path_buf(),
        source,
    })?;
    write_json(&run_dir.config_path(), cfg)?;

    let gateway = match (gateway, cfg.policy.needs_gateway()) {
        (Some(g), _) => Some(g),
        (None, true) => Some(cfg.gateway_spec()?.build(&cfg.model)?),
        (None, false) => None,
    };
    let prompts = PromptSet::load(cfg.prompts.as_deref()).map_err(|e| RunError::Config(e.to_string()))?;
    let factory = PolicyFactory {
        kind: cfg.policy,
        gateway: gateway.clone(),
        prompts: Arc::new(prompts),
        agent: cfg.agent()?,
    };
    let episode = cfg.episode();

    let ids: Vec<String> = corpus.ids().map(str::to_string).collect();
    let mut summary = RunSummary::default();
    let pending: Vec<&String> = ids
        .iter()
        .filter(|id| {
            let done = cfg.resume && run_dir.is_complete(id);
            if done {
                summary.skipped += 1;
            }
            !done
        })
        .collect();

    let next = AtomicUsize::new(0);
    let shared = Mutex::new((summary, None::<RunError>));
    std::thread::scope(|s| {
        for _ in 0..cfg.effective_jobs().min(pending.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(id) = pending.get(i) else { break };
                let result = corpus.load(id).and_then(|scenario| {
                    let log = factory.run(&scenario, &episode);
                    write_episode_log(&run_dir.log_path(id), &log).map(|_| log)
                });
                let mut guard = shared.lock().unwrap();
                match result {
                    Ok(log) => {
                        guard.0.completed += 1;
                        guard.0.successes += usize::from(log.is_success());
                        guard.0.errors += usize::from(log.error.is_some());
                        eprintln!(
                            "{id}: {} after {} steps, final distance {:.1} m{}",
                            log.outcome.map_or("unfinished", |o| o.name()),
                            log.steps.len(),
                            log.final_distance,
                            log.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
                        );
                    }
                    Err(e) => {
                        if guard.1.is_none() {
                            guard.1 = Some(e.into());
                        }
                        break;
                    }
                }
            });
        }
    });
    let (summary, failure) = shared.into_inner().unwrap();
    if let Some(g) = &gateway {
        write_ledger(&run_dir.ledger_path(), &g.ledger().snapshot(), cfg.resume)?;
    } else {
        write_ledger(&run_dir.ledger_path(), &LedgerSnapshot::default(), cfg.resume)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

fn write_ledger(path: &Path, snapshot: &LedgerSnapshot, merge: bool) -> Result<(), StoreError> {
    let mut total = snapshot.clone();
    if merge {
        if let Ok(previous) = read_json::<LedgerSnapshot>(path) {
            total.merge(&previous);
        }
    }
    write_json(path, &total)
}
