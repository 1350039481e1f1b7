//! Crawls every fixture with handlers on and off and prints task counts and
//! duplicate rates side by side.
//!
//! cargo run --example handler_ablation -- [fixtures dir]

use std::path::PathBuf;

use axcrawl::agents::AgentSuite;
use axcrawl::crawler::{crawl, CrawlerConfig, HandlerSet};
use axcrawl::graph::duplicate_rate;
use axcrawl::sim::{load_app_spec_file, SimBackend};
use axcrawl::tasks::{synthesize, SynthesisOptions};

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")));
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).expect("fixtures dir").filter_map(|e| e.ok().map(|e| e.path())).collect();
    files.sort();
    println!("{:<12} {:>6} {:>6} {:>7} {:>7} {:>6} {:>6}", "app", "tasks+", "tasks-", "dup+", "dup-", "nodes+", "nodes-");
    for f in files.iter().filter(|f| f.to_string_lossy().ends_with(".app.json")) {
        let backend = SimBackend::new(load_app_spec_file(f).expect("spec"));
        let mut row = Vec::new();
        for handlers in [HandlerSet::ALL, HandlerSet::NONE] {
            let config = CrawlerConfig { handlers, ..CrawlerConfig::default() };
            let agents = AgentSuite::deterministic(config.default_text.clone());
            let out = crawl(&backend, &config, &agents).expect("crawl");
            let opts = SynthesisOptions { screen_id_base: 0, acceptor: Some(&backend) };
            let tasks = synthesize(&out.graph, &agents, &opts);
            row.push((tasks.len(), duplicate_rate(&out.graph, &out.report), out.graph.nodes.len()));
        }
        println!(
            "{:<12} {:>6} {:>6} {:>7.3} {:>7.3} {:>6} {:>6}",
            backend.spec().app_name, row[0].0, row[1].0, row[0].1, row[1].1, row[0].2, row[1].2
        );
    }
}
