//! On-disk formats: scenario documents, corpus manifests, episode logs and
//! run directories.
//!
//! A scenario is one self-contained JSON document (schema version 1). A
//! corpus is a directory holding `manifest.json` plus `scenarios/<id>.json`.
//! A run directory holds `config.json`, one `<scenario_id>.jsonl` per
//! episode and `ledger.json`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use aeronav_core::episode::{EpisodeLog, Outcome, StepRecord};
use aeronav_core::scenario::{LengthGroup, Scenario, SCHEMA_VERSION};
use aeronav_core::{AgentPose, Vec3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCENARIO_DIR: &str = "scenarios";
pub const RUN_CONFIG_FILE: &str = "config.json";
pub const LEDGER_FILE: &str = "ledger.json";

/// A document that does not match the expected schema.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("schema v{expected} violation at `{path}`: {message}")]
pub struct SchemaError {
    /// Dotted path of the offending field; empty for the document root.
    pub path: String,
    pub message: String,
    pub expected: u32,
}

impl SchemaError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
            expected: SCHEMA_VERSION,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Schema {
        path: PathBuf,
        #[source]
        source: SchemaError,
    },
    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Log { path: PathBuf, line: usize, message: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Deserializes `value`, reporting the path of the first failing field.
fn decode<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        SchemaError::new(path, e.into_inner().to_string())
    })
}

/// Parses a scenario document, checking the schema version first.
pub fn scenario_from_str(text: &str) -> Result<Scenario, SchemaError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SchemaError::new("", format!("not valid JSON: {e}")))?;
    let Some(obj) = value.as_object() else {
        return Err(SchemaError::new("", "expected a JSON object"));
    };
    match obj.get("version") {
        None => return Err(SchemaError::new("version", "missing schema version")),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => {
            return Err(SchemaError::new(
                "version",
                format!("unsupported schema version {v}"),
            ))
        }
    }
    decode(value)
}

pub fn scenario_to_string(scenario: &Scenario) -> String {
    let mut s = serde_json::to_string_pretty(scenario).expect("scenario serializes");
    s.push('\n');
    s
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<(), StoreError> {
    write_atomic(path, scenario_to_string(scenario).as_bytes())
}

pub fn load_scenario(path: &Path) -> Result<Scenario, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    scenario_from_str(&text).map_err(|source| StoreError::Schema {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a sibling temporary file so readers never see a partial
/// document.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| StoreError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    decode(value).map_err(|source| StoreError::Schema {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub group: Option<LengthGroup>,
    /// Path relative to the corpus root.
    pub file: String,
    pub ground_truth_length: f64,
    pub instruction: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub scenarios: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn entry(&self, id: &str) -> Option<&ManifestEntry> {
        self.scenarios.iter().find(|e| e.id == id)
    }
}

/// A scenario directory with its manifest.
#[derive(Debug, Clone)]
pub struct Corpus {
    root: PathBuf,
    manifest: Manifest,
}

impl Corpus {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let manifest = read_json(&root.join(MANIFEST_FILE))?;
        Ok(Self { root, manifest })
    }

    /// Writes every scenario and a manifest listing them in the given order.
    pub fn create(root: impl Into<PathBuf>, scenarios: &[Scenario]) -> Result<Self, StoreError> {
        let root = root.into();
        let mut entries = Vec::with_capacity(scenarios.len());
        for s in scenarios {
            let file = format!("{SCENARIO_DIR}/{}.json", s.id);
            save_scenario(s, &root.join(&file))?;
            entries.push(ManifestEntry {
                id: s.id.clone(),
                group: s.meta.group,
                file,
                ground_truth_length: s.ground_truth.length,
                instruction: s.goal.instruction.clone(),
            });
        }
        let manifest = Manifest {
            version: SCHEMA_VERSION,
            scenarios: entries,
        };
        write_json(&root.join(MANIFEST_FILE), &manifest)?;
        Ok(Self { root, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.manifest.scenarios.iter().map(|e| e.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.manifest.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.scenarios.is_empty()
    }

    pub fn load(&self, id: &str) -> Result<Scenario, StoreError> {
        let entry = self
            .manifest
            .entry(id)
            .ok_or_else(|| StoreError::UnknownScenario(id.to_string()))?;
        load_scenario(&self.root.join(&entry.file))
    }

    pub fn load_all(&self) -> Result<Vec<Scenario>, StoreError> {
        self.ids().map(|id| self.load(id)).collect()
    }
}

/// Episode-level fields of a log, stored as the first JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeHeader {
    pub scenario_id: String,
    pub policy: String,
    pub goal: Vec3,
    pub epsilon: f64,
    pub optimal_length: f64,
    pub initial_pose: AgentPose,
    pub initial_distance: f64,
    pub outcome: Option<Outcome>,
    pub final_distance: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogLine {
    Header(EpisodeHeader),
    Step(StepRecord),
}

pub fn episode_to_jsonl(log: &EpisodeLog) -> String {
    let header = EpisodeHeader {
        scenario_id: log.scenario_id.clone(),
        policy: log.policy.clone(),
        goal: log.goal,
        epsilon: log.epsilon,
        optimal_length: log.optimal_length,
        initial_pose: log.initial_pose,
        initial_distance: log.initial_distance,
        outcome: log.outcome,
        final_distance: log.final_distance,
        steps: log.steps.len(),
        error: log.error.clone(),
    };
    let mut out = serde_json::to_string(&LogLine::Header(header)).expect("header serializes");
    out.push('\n');
    for s in &log.steps {
        out.push_str(&serde_json::to_string(&LogLine::Step(s.clone())).expect("step serializes"));
        out.push('\n');
    }
    out
}

pub fn write_episode_log(path: &Path, log: &EpisodeLog) -> Result<(), StoreError> {
    write_atomic(path, episode_to_jsonl(log).as_bytes())
}

pub fn read_episode_log(path: &Path) -> Result<EpisodeLog, StoreError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let bad = |line: usize, message: String| StoreError::Log {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut header: Option<EpisodeHeader> = None;
    let mut steps = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| bad(i + 1, e.to_string()))?;
        match decode::<LogLine>(value).map_err(|e| bad(i + 1, e.to_string()))? {
            LogLine::Header(h) if header.is_none() && i == 0 => header = Some(h),
            LogLine::Header(_) => return Err(bad(i + 1, "unexpected header line".into())),
            LogLine::Step(s) => steps.push(s),
        }
    }
    let h = header.ok_or_else(|| bad(1, "missing header line".into()))?;
    if h.steps != steps.len() {
        return Err(bad(
            steps.len() + 1,
            format!("header announces {} steps, found {}", h.steps, steps.len()),
        ));
    }
    Ok(EpisodeLog {
        scenario_id: h.scenario_id,
        policy: h.policy,
        goal: h.goal,
        epsilon: h.epsilon,
        optimal_length: h.optimal_length,
        initial_pose: h.initial_pose,
        initial_distance: h.initial_distance,
        steps,
        outcome: h.outcome,
        final_distance: h.final_distance,
        error: h.error,
    })
}

/// Layout of a run output directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_path(&self) -> PathBuf {
        self.root.join(RUN_CONFIG_FILE)
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.root.join(LEDGER_FILE)
    }

    pub fn log_path(&self, scenario_id: &str) -> PathBuf {
        self.root.join(format!("{scenario_id}.jsonl"))
    }

    /// True when a finished log for `scenario_id` is already on disk.
    pub fn is_complete(&self, scenario_id: &str) -> bool {
        read_episode_log(&self.log_path(scenario_id)).is_ok_and(|l| l.outcome.is_some())
    }

    /// Every episode log in the directory, sorted by scenario id.
    pub fn load_logs(&self) -> Result<Vec<EpisodeLog>, StoreError> {
        let rd = fs::read_dir(&self.root).map_err(io_err(&self.root))?;
        let mut paths: Vec<PathBuf> = rd
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        paths.iter().map(|p| read_episode_log(p)).collect()
    }
}

/// Appends one line to a text file, creating it if needed.
pub fn append_line(path: &Path, line: &str) -> Result<(), StoreError> {
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    writeln!(f, "{line}").map_err(io_err(path))
}
