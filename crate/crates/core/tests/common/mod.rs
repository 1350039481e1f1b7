#![allow(dead_code)]

pub mod gen;

use std::path::PathBuf;

use axcrawl::agents::AgentSuite;
use axcrawl::crawler::{crawl, CrawlOutcome, CrawlerConfig, HandlerSet};
use axcrawl::sim::{load_app_spec_file, AppSpec, SimBackend};
use axcrawl::tasks::{synthesize, SynthesisOptions, TaskRecord};

pub const QUIRKY: &[&str] = &["stocks", "maps", "weather"];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixtures_dir().join(format!("{name}.app.json"))
}

pub fn all_fixtures() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().to_str()?.strip_suffix(".app.json").map(str::to_string))
        .collect();
    names.sort();
    names
}

pub fn spec(name: &str) -> AppSpec {
    load_app_spec_file(&fixture_path(name)).unwrap()
}

pub fn backend(name: &str) -> SimBackend {
    SimBackend::new(spec(name))
}

pub fn config(handlers: HandlerSet) -> CrawlerConfig {
    CrawlerConfig { handlers, ..CrawlerConfig::default() }
}

pub fn run(backend: &SimBackend, config: &CrawlerConfig) -> (CrawlOutcome, Vec<TaskRecord>) {
    let agents = AgentSuite::deterministic(config.default_text.clone());
    run_with(backend, config, &agents)
}

pub fn run_with(backend: &SimBackend, config: &CrawlerConfig, agents: &AgentSuite) -> (CrawlOutcome, Vec<TaskRecord>) {
    let out = crawl(backend, config, agents).unwrap();
    let records = synthesize(&out.graph, agents, &SynthesisOptions { screen_id_base: 0, acceptor: Some(backend) });
    (out, records)
}

use std::collections::HashMap;
use std::sync::Mutex;

use axcrawl::agents::{AgentRequest, AgentRole, ClientError, LlmClient};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct MockCall {
    pub role: AgentRole,
    pub key: String,
    pub malformed: bool,
}

/// Answers every other distinct request with broken JSON. Identical requests
/// get identical treatment; valid replies are built from the payload.
#[derive(Default)]
pub struct HalfBroken {
    decided: Mutex<HashMap<String, bool>>,
    pub calls: Mutex<Vec<MockCall>>,
}

fn ids(v: &Value) -> Vec<u64> {
    v.as_array().map(|a| a.iter().filter_map(|x| x.as_u64().or_else(|| x["id"].as_u64())).collect()).unwrap_or_default()
}

pub fn mock_key(r: &AgentRequest) -> String {
    let p = &r.payload;
    let body = match r.role {
        AgentRole::Input => format!("{:?}", ids(&p["text_field_ids"])),
        AgentRole::Order => format!("{:?}", ids(&p["presented"])),
        AgentRole::ClickTask => p["element"]["id"].to_string(),
        AgentRole::InputTask => format!("{}:{}", p["field"]["id"], p["typed_text"]),
    };
    format!("{:?}:{body}", r.role)
}

pub fn mock_click_task(id: u32) -> String {
    format!("Mock task {id}")
}

pub fn mock_input_task(id: u32) -> String {
    format!("Mock input {id}")
}

impl HalfBroken {
    pub fn malformed(&self, key: &str) -> Option<bool> {
        self.decided.lock().unwrap().get(key).copied()
    }

    fn valid(r: &AgentRequest) -> String {
        let p = &r.payload;
        match r.role {
            AgentRole::Input => {
                let m: serde_json::Map<String, Value> =
                    ids(&p["text_field_ids"]).into_iter().map(|id| (id.to_string(), json!(format!("Mock {id}")))).collect();
                Value::Object(m).to_string()
            }
            AgentRole::Order => json!({ "action_order": [{ "mock": ids(&p["presented"]) }], "login_page": false }).to_string(),
            AgentRole::ClickTask => {
                let id = p["element"]["id"].as_u64().unwrap() as u32;
                json!({ "task": mock_click_task(id), "task_category": "Settings", "element_category": "Button" }).to_string()
            }
            AgentRole::InputTask => {
                let id = p["field"]["id"].as_u64().unwrap() as u32;
                let text = p["typed_text"].as_str().unwrap();
                json!({ "task": mock_input_task(id), "action": format!("type {text}") }).to_string()
            }
        }
    }
}

impl LlmClient for HalfBroken {
    fn complete(&self, r: &AgentRequest) -> Result<String, ClientError> {
        let key = mock_key(r);
        let malformed = {
            let mut d = self.decided.lock().unwrap();
            let n = d.len();
            *d.entry(key.clone()).or_insert(n.is_multiple_of(2))
        };
        self.calls.lock().unwrap().push(MockCall { role: r.role, key, malformed });
        if malformed {
            Ok(r#"{"task": "unterminated"#.into())
        } else {
            Ok(Self::valid(r))
        }
    }
}
