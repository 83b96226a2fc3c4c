use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use aeronav::reports::{displacements_csv, histogram_csv, metrics_csv, write_analysis};
use aeronav::runner::{run_corpus, PolicyKind, RunConfig};
use aeronav::service::{serve, ServiceState};
use aeronav::store::{write_atomic, write_json, Corpus, RunDir};
use aeronav_core::episode::EpisodeConfig;
use aeronav_core::metrics::{dataset_stats, GroupMode, MetricReport};
use aeronav_core::scenario::{generate, GenerateParams, LengthGroup, Scenario};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "aeronav", version, about = "Goal-oriented aerial navigation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario corpus with a manifest.
    Generate(GenerateArgs),
    /// Run a policy over a corpus, writing one log per episode.
    Run(RunArgs),
    /// Score a run: SR, SPL and DTG per length group and overall.
    Eval(EvalArgs),
    /// Per-episode CDB table and progress curves for a run.
    Analyze(AnalyzeArgs),
    /// Serve the control API over a corpus.
    Serve(ServeArgs),
    /// Dataset statistics of a corpus.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    /// Comma-separated length groups to cycle through.
    #[arg(long)]
    groups: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GenerateConfig {
    seed: u64,
    count: usize,
    groups: String,
    out: PathBuf,
    jobs: Option<usize>,
    /// Overrides applied to every group's generator parameters.
    params: Option<GenerateParams>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 30,
            groups: String::from("short,middle,long"),
            out: PathBuf::from("corpus"),
            jobs: None,
            params: None,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    /// Comma-separated: grounding, crossview, imagination, sparse_memory.
    #[arg(long)]
    enhancements: Option<String>,
    /// live, replay:PATH or record:PATH.
    #[arg(long)]
    gateway: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Directory overriding the built-in prompt templates.
    #[arg(long)]
    prompts: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Skip scenarios that already have a finished log.
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    max_steps: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Trisect,
    #[value(name = "paper_fixed", alias = "paper-fixed")]
    PaperFixed,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long, value_enum, default_value = "trisect")]
    mode: ModeArg,
    /// CSV destination; defaults to `<run>/metrics_<mode>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    run: PathBuf,
    /// Output directory; defaults to `<run>/analysis`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Built console assets to serve under `/`.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
    /// Where finished session logs are written.
    #[arg(long)]
    logs: Option<PathBuf>,
    #[arg(long)]
    max_steps: Option<u32>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Also write stats.json and CSV tables here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_groups(list: &str) -> Result<Vec<LengthGroup>, String> {
    let groups: Vec<LengthGroup> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|g| LengthGroup::from_name(g).ok_or_else(|| format!("unknown group `{g}`")))
        .collect::<Result<_, _>>()?;
    if groups.is_empty() {
        return Err("at least one group is required".into());
    }
    Ok(groups)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generates scenario `k` of group `gi`, moving to fresh seeds on failure.
fn generate_one(base: u64, gi: usize, k: usize, params: &GenerateParams) -> Result<Scenario, String> {
    for retry in 0..8u64 {
        let seed = splitmix(base ^ splitmix(((gi as u64) << 48) ^ ((k as u64) << 8) ^ retry)) & 0xFFFF_FFFF;
        if let Ok(s) = generate(seed, params) {
            return Ok(s);
        }
    }
    Err(format!("could not generate {} scenario #{k}", params.group.name()))
}

fn cmd_generate(a: GenerateArgs) -> Result<(), String> {
    let mut cfg: GenerateConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => GenerateConfig::default(),
    };
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.count = a.count.unwrap_or(cfg.count);
    cfg.groups = a.groups.unwrap_or(cfg.groups);
    cfg.out = a.out.unwrap_or(cfg.out);
    cfg.jobs = a.jobs.or(cfg.jobs);
    let groups = parse_groups(&cfg.groups)?;

    let mut tasks = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let gi = i % groups.len();
        let mut params = cfg.params.clone().unwrap_or_default();
        params.group = groups[gi];
        let defaults = GenerateParams::for_group(groups[gi]);
        if cfg.params.is_none() {
            params = defaults;
        }
        tasks.push((gi, i / groups.len(), params));
    }
    let jobs = cfg
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<Result<Scenario, String>>>> =
        (0..tasks.len()).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.min(tasks.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some((gi, k, params)) = tasks.get(i) else { break };
                *slots[i].lock().unwrap() = Some(generate_one(cfg.seed, *gi, *k, params));
            });
        }
    });
    let scenarios: Vec<Scenario> = slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every task ran"))
        .collect::<Result<_, _>>()?;
    let corpus = Corpus::create(&cfg.out, &scenarios).map_err(|e| e.to_string())?;
    eprintln!("wrote {} scenarios to {}", corpus.len(), cfg.out.display());
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<(), String> {
    let mut cfg: RunConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.corpus {
        cfg.corpus = v;
    }
    if let Some(v) = a.policy {
        cfg.policy = v;
    }
    if let Some(v) = a.enhancements {
        cfg.enhancements = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(v) = a.gateway {
        cfg.gateway = v;
    }
    if let Some(v) = a.model {
        cfg.model = v;
    }
    if let Some(v) = a.prompts {
        cfg.prompts = Some(v);
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    if let Some(v) = a.jobs {
        cfg.jobs = Some(v);
    }
    cfg.resume |= a.resume;
    if let Some(v) = a.max_steps {
        cfg.max_steps = v;
    }
    if let Some(v) = a.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    let corpus = Corpus::open(&cfg.corpus).map_err(|e| e.to_string())?;
    let summary = run_corpus(&cfg, &corpus).map_err(|e| e.to_string())?;
    eprintln!(
        "{} episodes run, {} skipped, {} successes, {} aborted",
        summary.completed, summary.skipped, summary.successes, summary.errors
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), String> {
    let logs = RunDir::new(&a.run).load_logs().map_err(|e| e.to_string())?;
    if logs.is_empty() {
        return Err(format!("no episode logs in {}", a.run.display()));
    }
    let (mode, name) = match a.mode {
        ModeArg::Trisect => (GroupMode::Trisect, "trisect"),
        ModeArg::PaperFixed => (GroupMode::PaperFixed, "paper_fixed"),
    };
    let report = MetricReport::compute(&logs, mode);
    let text = metrics_csv(&report);
    let out = a.out.unwrap_or_else(|| a.run.join(format!("metrics_{name}.csv")));
    write_atomic(&out, text.as_bytes()).map_err(|e| e.to_string())?;
    eprintln!(
        "group boundaries: short < {:.1} m <= middle <= {:.1} m < long",
        report.bounds.0, report.bounds.1
    );
    let _ = std::io::stdout().write_all(text.as_bytes());
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), String> {
    let logs = RunDir::new(&a.run).load_logs().map_err(|e| e.to_string())?;
    let out = a.out.unwrap_or_else(|| a.run.join("analysis"));
    let skipped = write_analysis(&out, &logs).map_err(|e| e.to_string())?;
    for id in &skipped {
        eprintln!("{id}: started inside the success radius; no progress curve");
    }
    eprintln!("wrote {} ({} episodes)", out.display(), logs.len());
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> Result<(), String> {
    let corpus = Corpus::open(&a.corpus).map_err(|e| e.to_string())?;
    let mut episode = EpisodeConfig::default();
    if let Some(m) = a.max_steps {
        episode.max_steps = m;
    }
    episode.validate().map_err(|e| e.to_string())?;
    let mut state = ServiceState::from_corpus(&corpus, episode).map_err(|e| e.to_string())?;
    if let Some(dir) = a.logs {
        state = state.with_log_dir(dir);
    }
    let addr: SocketAddr = format!("{}:{}", a.bind, a.port)
        .parse()
        .map_err(|e| format!("invalid bind address: {e}"))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(serve(Arc::new(state), addr, a.static_dir)).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct StatsSummary<'a> {
    scenarios: usize,
    mean_length: f64,
    horizontal: f64,
    vertical: f64,
    rotation: f64,
    length_histogram: &'a [aeronav_core::metrics::HistogramBin],
}

fn cmd_stats(a: StatsArgs) -> Result<(), String> {
    let corpus = Corpus::open(&a.corpus).map_err(|e| e.to_string())?;
    let scenarios = corpus.load_all().map_err(|e| e.to_string())?;
    let stats = dataset_stats(&scenarios).map_err(|e| e.to_string())?;
    let summary = StatsSummary {
        scenarios: stats.scenarios,
        mean_length: stats.mean_length,
        horizontal: stats.horizontal,
        vertical: stats.vertical,
        rotation: stats.rotation,
        length_histogram: &stats.length_histogram,
    };
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    if let Some(out) = a.out {
        write_json(&out.join("stats.json"), &stats).map_err(|e| e.to_string())?;
        write_atomic(&out.join("length_histogram.csv"), histogram_csv(&stats).as_bytes()).map_err(|e| e.to_string())?;
        write_atomic(&out.join("displacements.csv"), displacements_csv(&stats).as_bytes()).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
