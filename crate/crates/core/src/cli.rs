//! Command-line front end. `run` parses arguments, dispatches and returns the
//! process exit code.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentSuite, HttpClient, LlmClientConfig};
use crate::ax::Point;
use crate::crawler::{crawl, CrawlReport, CrawlerConfig, HandlerSet, SignificanceMode};
use crate::eval::{self, format_report, CommandPredictor, Predictor, ReportAxis, ReportStyle};
use crate::graph::{self, InteractionGraph};
use crate::sim::{load_app_spec_file, AppSpec, SimBackend};
use crate::tasks::{self, SynthesisOptions, TaskRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SPEC: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("spec: {0}")]
    Spec(String),
    #[error("no inputs: {0}")]
    Empty(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Spec(_) => EXIT_SPEC,
            CliError::Empty(_) => EXIT_EMPTY,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Failure(format!("{}: {e}", path.display()))
}

/// Everything a crawl run needs. Loaded from an optional JSON file, then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub crawler: CrawlerConfig,
    pub llm: LlmClientConfig,
    pub specs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub parallel_workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            crawler: CrawlerConfig::default(),
            llm: LlmClientConfig::default(),
            specs: Vec::new(),
            out_dir: PathBuf::from("out"),
            parallel_workers: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.crawler.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.parallel_workers == 0 {
            return Err(CliError::Config("parallel_workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Parser)]
#[command(name = "axcrawl", version, about = "Crawl applications, synthesize grounded tasks and evaluate grounding models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crawl app specs into interaction graphs (and task records).
    Crawl(CrawlArgs),
    /// Synthesize task records from existing graph files.
    Tasks(TasksArgs),
    /// Split a task dataset into train and test by application.
    Split(SplitArgs),
    /// Evaluate predictors on a task dataset.
    Eval(EvalArgs),
    /// Summarize graphs or task datasets.
    Stats(StatsArgs),
    /// Render a graph as SVG or DOT.
    Viz(VizArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignificanceArg {
    Joint,
    Either,
}

#[derive(Debug, Args)]
pub struct CrawlArgs {
    /// App spec files (*.app.json) or directories containing them.
    pub specs: Vec<PathBuf>,
    /// JSON run config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Wall-clock budget per app in minutes [default: 120]
    #[arg(long, value_name = "MINUTES")]
    pub max_duration: Option<u64>,
    /// Text typed into input fields [default: DEFAULT]
    #[arg(long, value_name = "TEXT")]
    pub default_text: Option<String>,
    /// Maximum graph depth [default: 25]
    #[arg(long)]
    pub max_depth: Option<u32>,
    /// Move the cursor onto each target before clicking [default: false]
    #[arg(long)]
    pub cursor_move: bool,
    /// Use deterministic fallbacks instead of LLM agents [default: agents on]
    #[arg(long)]
    pub no_agents: bool,
    /// Skip task collection [default: tasks on]
    #[arg(long)]
    pub no_tasks: bool,
    /// Elements that must appear or disappear for a new state [default: 10]
    #[arg(long)]
    pub threshold: Option<u32>,
    /// How the threshold is applied [default: joint]
    #[arg(long, value_enum)]
    pub significance: Option<SignificanceArg>,
    /// Enable the popup, invisible, menu and empty-element handlers [default: on]
    #[arg(long, value_enum)]
    pub handlers: Option<OnOff>,
    /// Apps crawled in parallel [default: 1]
    #[arg(long)]
    pub workers: Option<usize>,
    /// RNG seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chat-completions endpoint URL; without it agents fall back to deterministic output
    #[arg(long)]
    pub llm_endpoint: Option<String>,
    /// Model name [default: gpt-4o]
    #[arg(long)]
    pub llm_model: Option<String>,
    /// Environment variable holding the API key [default: OPENAI_API_KEY]
    #[arg(long, value_name = "VAR")]
    pub llm_api_key_env: Option<String>,
}

#[derive(Debug, Args)]
pub struct TasksArgs {
    /// Graph files (*.graph.json) or directories containing them.
    pub graphs: Vec<PathBuf>,
    /// Output JSONL file [default: tasks.jsonl]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory of app specs used to confirm invented input text
    #[arg(long)]
    pub specs: Option<PathBuf>,
    /// Text typed into input fields [default: DEFAULT]
    #[arg(long, value_name = "TEXT")]
    pub default_text: Option<String>,
    /// Also write screenshots and crops under this directory
    #[arg(long)]
    pub images: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Task dataset (JSONL).
    pub tasks: PathBuf,
    /// Fraction of apps in the test set [default: 0.2]
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Output directory for split.json, train.jsonl and test.jsonl [default: .]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Task dataset (JSONL).
    pub tasks: PathBuf,
    /// oracle, never, random, fixed:X,Y or cmd:<shell command>; repeatable [default: oracle]
    #[arg(long = "predictor")]
    pub predictors: Vec<String>,
    /// Repeated runs per predictor [default: 1]
    #[arg(long)]
    pub runs: Option<u32>,
    /// Seed for the random predictor [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory that image_ref paths are relative to [default: dataset directory]
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    /// Output directory for eval.json and report tables [default: .]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Graph files, task datasets or directories.
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VizFormat {
    Svg,
    Dot,
}

#[derive(Debug, Args)]
pub struct VizArgs {
    pub graph: PathBuf,
    /// [default: svg]
    #[arg(long, value_enum)]
    pub format: Option<VizFormat>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(cli.command, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Crawl(a) => cmd_crawl(&run_config(&a)?, out),
        Command::Tasks(a) => cmd_tasks(&a, out),
        Command::Split(a) => cmd_split(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Viz(a) => cmd_viz(&a, out),
    }
}

/// Defaults, then the config file, then flags.
pub fn run_config(a: &CrawlArgs) -> Result<RunConfig, CliError> {
    let mut rc = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let c = &mut rc.crawler;
    if let Some(v) = a.max_duration {
        c.max_duration_minutes = v;
    }
    if let Some(v) = &a.default_text {
        c.default_text = v.clone();
    }
    if let Some(v) = a.max_depth {
        c.max_depth = v;
    }
    if a.cursor_move {
        c.cursor_move_before_click = true;
    }
    if a.no_agents {
        c.agent_usage = false;
    }
    if a.no_tasks {
        c.task_collection = false;
    }
    if let Some(v) = a.threshold {
        c.significant_change_threshold = v;
    }
    if let Some(v) = a.significance {
        c.significance_mode = match v {
            SignificanceArg::Joint => SignificanceMode::Joint,
            SignificanceArg::Either => SignificanceMode::EitherAlone,
        };
    }
    if let Some(v) = a.handlers {
        c.handlers = if v == OnOff::On { HandlerSet::ALL } else { HandlerSet::NONE };
    }
    if let Some(v) = a.seed {
        c.rng_seed = v;
    }
    if let Some(v) = &a.llm_endpoint {
        rc.llm.endpoint_url = Some(v.clone());
    }
    if let Some(v) = &a.llm_model {
        rc.llm.model_name = v.clone();
    }
    if let Some(v) = &a.llm_api_key_env {
        rc.llm.api_key_env_var = v.clone();
    }
    if !a.specs.is_empty() {
        rc.specs = a.specs.clone();
    }
    if let Some(v) = &a.out {
        rc.out_dir = v.clone();
    }
    if let Some(v) = a.workers {
        rc.parallel_workers = v;
    }
    rc.validate()?;
    Ok(rc)
}

/// Expands directories into the files inside them whose names end in
/// `suffix`, sorted; plain files are kept as given.
fn collect_inputs(paths: &[PathBuf], suffix: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| io_err(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)))
                .collect();
            found.sort();
            out.extend(found);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(CliError::Empty(format!("{} does not exist", p.display())));
        }
    }
    Ok(out)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn build_agents(rc: &RunConfig) -> Result<AgentSuite, CliError> {
    let text = rc.crawler.default_text.clone();
    if !rc.crawler.agent_usage {
        return Ok(AgentSuite::deterministic(text));
    }
    match HttpClient::from_config(&rc.llm).map_err(|e| CliError::Config(e.to_string()))? {
        Some(client) => Ok(AgentSuite::with_client(Arc::new(client), text, rc.llm.max_retries)),
        None => {
            log::info!("no LLM endpoint configured; agents use deterministic fallbacks");
            Ok(AgentSuite::deterministic(text))
        }
    }
}

struct AppRun {
    app: String,
    report: CrawlReport,
    records: Vec<TaskRecord>,
    failed: bool,
}

fn crawl_one(spec: AppSpec, rc: &RunConfig) -> Result<AppRun, CliError> {
    let agents = build_agents(rc)?;
    let backend = SimBackend::new(spec);
    let app = backend.spec().app_name.clone();
    let outcome = crawl(&backend, &rc.crawler, &agents).map_err(|e| CliError::Failure(format!("{app}: {e}")))?;
    let records = if rc.crawler.task_collection {
        tasks::synthesize(&outcome.graph, &agents, &SynthesisOptions { screen_id_base: 0, acceptor: Some(&backend) })
    } else {
        Vec::new()
    };
    let dir = &rc.out_dir;
    write_file(&dir.join(format!("{app}.graph.json")), &outcome.graph.serialize())?;
    write_file(&dir.join(format!("{app}.graph.svg")), graph::export_svg(&outcome.graph).as_bytes())?;
    let report = serde_json::to_vec_pretty(&outcome.report).expect("report serializes");
    write_file(&dir.join(format!("{app}.report.json")), &report)?;
    if agents.has_client() {
        let t = serde_json::to_vec_pretty(&agents.telemetry().snapshot()).expect("telemetry serializes");
        write_file(&dir.join(format!("{app}.telemetry.json")), &t)?;
    }
    for (rel, bytes) in tasks::render_assets(&outcome.graph, &records) {
        write_file(&dir.join(rel), &bytes)?;
    }
    if let Some(e) = &outcome.failure {
        log::error!("{app}: crawl ended early: {e}");
    }
    Ok(AppRun { app, report: outcome.report, records, failed: outcome.failure.is_some() })
}

/// Gives each app's records a disjoint screen id range, apps in name order.
fn renumber(runs: &mut [(String, Vec<TaskRecord>)]) {
    runs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut base = 0;
    for (_, records) in runs.iter_mut() {
        let span = records.iter().map(|r| r.screen_id + 1).max().unwrap_or(0);
        for r in records.iter_mut() {
            r.screen_id += base;
        }
        base += span;
    }
}

pub fn cmd_crawl(rc: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let files = collect_inputs(&rc.specs, ".app.json")?;
    if files.is_empty() {
        return Err(CliError::Empty("no app specs given".into()));
    }
    let mut specs = Vec::new();
    for f in &files {
        specs.push(load_app_spec_file(f).map_err(|e| CliError::Spec(format!("{}: {e}", f.display())))?);
    }
    let mut names = std::collections::BTreeSet::new();
    for s in &specs {
        if !names.insert(s.app_name.clone()) {
            return Err(CliError::Spec(format!("duplicate app_name {:?}", s.app_name)));
        }
    }
    std::fs::create_dir_all(&rc.out_dir).map_err(|e| io_err(&rc.out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(rc.parallel_workers)
        .build()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let results: Vec<Result<AppRun, CliError>> = pool.install(|| specs.into_par_iter().map(|s| crawl_one(s, rc)).collect());
    let mut runs = Vec::new();
    let mut failed = false;
    for r in results {
        let r = r?;
        writeln!(
            out,
            "{}: {} nodes, {} edges, {} duplicates, {} tasks, halted {:?}",
            r.app,
            r.report.nodes_created,
            r.report.edges_created,
            r.report.duplicates_linked,
            r.records.len(),
            r.report.halted_reason
        )
        .map_err(|e| CliError::Failure(e.to_string()))?;
        failed |= r.failed;
        runs.push((r.app, r.records));
    }
    if rc.crawler.task_collection {
        renumber(&mut runs);
        let all: Vec<TaskRecord> = runs.into_iter().flat_map(|(_, r)| r).collect();
        write_file(&rc.out_dir.join("tasks.jsonl"), tasks::to_jsonl(&all).as_bytes())?;
    }
    Ok(if failed { EXIT_FAILURE } else { EXIT_OK })
}

fn read_graph(path: &Path) -> Result<InteractionGraph, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    InteractionGraph::deserialize(&bytes).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))
}

pub fn cmd_tasks(a: &TasksArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let files = collect_inputs(&a.graphs, ".graph.json")?;
    if files.is_empty() {
        return Err(CliError::Empty("no graph files given".into()));
    }
    let mut backends: BTreeMap<String, SimBackend> = BTreeMap::new();
    if let Some(dir) = &a.specs {
        for f in collect_inputs(std::slice::from_ref(dir), ".app.json")? {
            let s = load_app_spec_file(&f).map_err(|e| CliError::Spec(format!("{}: {e}", f.display())))?;
            backends.insert(s.app_name.clone(), SimBackend::new(s));
        }
    }
    let agents = AgentSuite::deterministic(a.default_text.clone().unwrap_or_else(|| CrawlerConfig::default().default_text));
    let mut runs = Vec::new();
    for f in &files {
        let g = read_graph(f)?;
        let acceptor = backends.get(&g.app_name).map(|b| b as &dyn crate::backend::SessionFactory);
        let records = tasks::synthesize(&g, &agents, &SynthesisOptions { screen_id_base: 0, acceptor });
        if let Some(dir) = &a.images {
            for (rel, bytes) in tasks::render_assets(&g, &records) {
                write_file(&dir.join(rel), &bytes)?;
            }
        }
        runs.push((g.app_name.clone(), records));
    }
    renumber(&mut runs);
    let all: Vec<TaskRecord> = runs.into_iter().flat_map(|(_, r)| r).collect();
    let path = a.out.clone().unwrap_or_else(|| PathBuf::from("tasks.jsonl"));
    write_file(&path, tasks::to_jsonl(&all).as_bytes())?;
    writeln!(out, "{} tasks written to {}", all.len(), path.display()).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(EXIT_OK)
}

fn read_tasks(path: &Path) -> Result<Vec<TaskRecord>, CliError> {
    if !path.exists() {
        return Err(CliError::Empty(format!("{} does not exist", path.display())));
    }
    let records = tasks::read_dataset(path).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
    if records.is_empty() {
        return Err(CliError::Empty(format!("{} has no records", path.display())));
    }
    Ok(records)
}

pub fn cmd_split(a: &SplitArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let records = read_tasks(&a.tasks)?;
    let f = a.test_fraction.unwrap_or(tasks::DEFAULT_TEST_FRACTION);
    if !(0.0..=1.0).contains(&f) {
        return Err(CliError::Config(format!("test fraction {f} is outside [0, 1]")));
    }
    let s = tasks::split(&records, f).map_err(|e| CliError::Failure(e.to_string()))?;
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    write_file(&dir.join("split.json"), &serde_json::to_vec_pretty(&s.manifest).expect("manifest serializes"))?;
    write_file(&dir.join("train.jsonl"), tasks::to_jsonl(&s.train).as_bytes())?;
    write_file(&dir.join("test.jsonl"), tasks::to_jsonl(&s.test).as_bytes())?;
    writeln!(
        out,
        "train: {} apps, {} tasks; test: {} apps, {} tasks",
        s.manifest.train_apps.len(),
        s.manifest.train_count,
        s.manifest.test_apps.len(),
        s.manifest.test_count
    )
    .map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(EXIT_OK)
}

/// Builds a predictor from its command-line name.
pub fn parse_predictor(spec: &str, seed: u64, image_root: &Path) -> Result<Box<dyn Predictor>, CliError> {
    match spec {
        "oracle" => Ok(Box::new(eval::Oracle)),
        "never" => Ok(Box::new(eval::NeverParse)),
        "random" => Ok(Box::new(eval::RandomClick { seed })),
        _ => {
            if let Some(cmd) = spec.strip_prefix("cmd:") {
                return Ok(Box::new(CommandPredictor::new(cmd, image_root)));
            }
            if let Some(xy) = spec.strip_prefix("fixed:") {
                let bad = || CliError::Config(format!("bad fixed predictor {spec:?}, expected fixed:X,Y"));
                let (x, y) = xy.split_once(',').ok_or_else(bad)?;
                let x: f64 = x.trim().parse().map_err(|_| bad())?;
                let y: f64 = y.trim().parse().map_err(|_| bad())?;
                return Ok(Box::new(eval::FixedPoint(Point::new(x, y))));
            }
            Err(CliError::Config(format!("unknown predictor {spec:?}")))
        }
    }
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let records = read_tasks(&a.tasks)?;
    let runs = a.runs.unwrap_or(1);
    if runs == 0 {
        return Err(CliError::Config("--runs must be at least 1".into()));
    }
    let image_root = a
        .image_root
        .clone()
        .unwrap_or_else(|| a.tasks.parent().map(Path::to_path_buf).unwrap_or_default());
    let names = if a.predictors.is_empty() { vec!["oracle".to_string()] } else { a.predictors.clone() };
    let mut reports = Vec::new();
    for n in &names {
        let p = parse_predictor(n, a.seed.unwrap_or(0), &image_root)?;
        reports.push(eval::evaluate(&records, p.as_ref(), runs).map_err(|e| CliError::Failure(e.to_string()))?);
    }
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    write_file(&dir.join("eval.json"), &serde_json::to_vec_pretty(&reports).expect("reports serialize"))?;
    for (axis, stem) in [(ReportAxis::TaskCategory, "task"), (ReportAxis::ElementCategory, "element")] {
        write_file(&dir.join(format!("eval_{stem}.md")), format_report(&reports, axis, ReportStyle::Markdown).as_bytes())?;
        write_file(&dir.join(format!("eval_{stem}.csv")), format_report(&reports, axis, ReportStyle::Csv).as_bytes())?;
    }
    let w = |e: std::io::Error| CliError::Failure(e.to_string());
    write!(out, "{}", format_report(&reports, ReportAxis::TaskCategory, ReportStyle::Markdown)).map_err(w)?;
    for r in &reports {
        if r.runs > 1 {
            writeln!(out, "{}: mean {:.2}% stddev {:.2}% over {} runs", r.predictor, r.mean * 100.0, r.stddev * 100.0, r.runs).map_err(w)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut graphs = collect_inputs(&a.inputs, ".graph.json")?;
    let mut datasets: Vec<PathBuf> = Vec::new();
    graphs.retain(|p| {
        let is_tasks = p.extension().is_some_and(|e| e == "jsonl");
        if is_tasks {
            datasets.push(p.clone());
        }
        !is_tasks
    });
    for p in &a.inputs {
        if p.is_dir() {
            datasets.extend(collect_inputs(std::slice::from_ref(p), ".jsonl")?);
        }
    }
    if graphs.is_empty() && datasets.is_empty() {
        return Err(CliError::Empty("no graphs or datasets given".into()));
    }
    let w = |e: std::io::Error| CliError::Failure(e.to_string());
    if !graphs.is_empty() {
        let mut depths = Vec::new();
        let (mut nodes, mut edges) = (0, 0);
        let mut genres: BTreeMap<String, usize> = BTreeMap::new();
        for f in &graphs {
            let g = read_graph(f)?;
            depths.push(graph::depth(&g) as f64);
            nodes += g.nodes.len();
            edges += g.edges.len();
            let genre = if g.genre.is_empty() { "unknown".to_string() } else { g.genre.clone() };
            *genres.entry(genre).or_default() += 1;
        }
        writeln!(out, "graphs: {}", graphs.len()).map_err(w)?;
        writeln!(out, "nodes: {nodes}").map_err(w)?;
        writeln!(out, "edges: {edges}").map_err(w)?;
        writeln!(out, "avg_depth: {:.1}", depths.iter().sum::<f64>() / depths.len() as f64).map_err(w)?;
        for (g, n) in &genres {
            writeln!(out, "genre {g}: {n}").map_err(w)?;
        }
    }
    if !datasets.is_empty() {
        let mut records = Vec::new();
        for f in &datasets {
            records.extend(tasks::read_dataset(f).map_err(|e| CliError::Spec(format!("{}: {e}", f.display())))?);
        }
        let count = |key: fn(&TaskRecord) -> &str| {
            let mut m: BTreeMap<&str, usize> = BTreeMap::new();
            for r in &records {
                *m.entry(key(r)).or_default() += 1;
            }
            m.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Vec<_>>()
        };
        writeln!(out, "tasks: {}", records.len()).map_err(w)?;
        writeln!(out, "original_tasks: {}", records.iter().filter(|r| r.original_task).count()).map_err(w)?;
        for (k, v) in count(|r| &r.app_name) {
            writeln!(out, "app {k}: {v}").map_err(w)?;
        }
        for (k, v) in count(|r| &r.task_category) {
            writeln!(out, "task_category {k}: {v}").map_err(w)?;
        }
        for (k, v) in count(|r| &r.element_category) {
            writeln!(out, "element_category {k}: {v}").map_err(w)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_viz(a: &VizArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if !a.graph.exists() {
        return Err(CliError::Empty(format!("{} does not exist", a.graph.display())));
    }
    let g = read_graph(&a.graph)?;
    let text = match a.format.unwrap_or(VizFormat::Svg) {
        VizFormat::Svg => graph::export_svg(&g),
        VizFormat::Dot => graph::export_dot(&g),
    };
    match &a.out {
        Some(p) => write_file(p, text.as_bytes())?,
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Failure(e.to_string()))?,
    }
    Ok(EXIT_OK)
}
