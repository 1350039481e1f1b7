mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use axcrawl::ax::{canonical_hash, HashMode};
use axcrawl::backend::SessionFactory;
use axcrawl::crawler::{CrawlerConfig, HaltedReason, HandlerSet, HANDLER_NAMES};
use axcrawl::graph::{depth, duplicate_rate, InteractionGraph};
use axcrawl::tasks::{filter_noop_edges, format_action};
use common::*;
use serde_json::Value;

/// Radius from the root, computed on the serialized graph only.
fn json_depth(bytes: &[u8]) -> usize {
    let v: Value = serde_json::from_slice(bytes).unwrap();
    let root = v["root"].as_u64().unwrap();
    let mut adj: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for e in v["edges"].as_array().unwrap() {
        adj.entry(e["from_node"].as_u64().unwrap()).or_default().push(e["out_vertex"].as_u64().unwrap());
    }
    let mut dist = BTreeMap::from([(root, 0usize)]);
    let mut q = VecDeque::from([root]);
    while let Some(n) = q.pop_front() {
        for m in adj.get(&n).cloned().unwrap_or_default() {
            if !dist.contains_key(&m) {
                dist.insert(m, dist[&n] + 1);
                q.push_back(m);
            }
        }
    }
    dist.into_values().max().unwrap()
}

#[test]
fn inert_app_is_one_node() {
    let (out, records) = run(&backend("inert"), &CrawlerConfig::default());
    assert_eq!(out.graph.nodes.len(), 1);
    assert!(out.graph.edges.is_empty());
    assert_eq!(out.report.halted_reason, HaltedReason::Complete);
    assert!(records.is_empty());
}

#[test]
fn linear_app_is_a_path() {
    let (out, _) = run(&backend("linear"), &CrawlerConfig::default());
    assert_eq!(out.graph.nodes.len(), 3);
    assert_eq!(out.graph.edges.len(), 2);
    assert_eq!(depth(&out.graph), 2);
}

#[test]
fn depth_matches_bruteforce_on_all_fixtures() {
    for name in all_fixtures() {
        for h in [HandlerSet::ALL, HandlerSet::NONE] {
            let (out, _) = run(&backend(&name), &config(h));
            assert_eq!(depth(&out.graph), json_depth(&out.graph.serialize()), "{name}");
        }
    }
}

#[test]
fn max_depth_bounds_graph() {
    let c = CrawlerConfig { max_depth: 1, ..CrawlerConfig::default() };
    let (out, _) = run(&backend("music"), &c);
    assert!(depth(&out.graph) <= 1);
    assert_eq!(out.report.halted_reason, HaltedReason::DepthExhausted);
    let (full, _) = run(&backend("music"), &CrawlerConfig::default());
    assert_eq!(depth(&full.graph), 3);
}

#[test]
fn graph_serialization_roundtrips() {
    for name in all_fixtures() {
        let (out, _) = run(&backend(&name), &CrawlerConfig::default());
        let bytes = out.graph.serialize();
        let back = InteractionGraph::deserialize(&bytes).unwrap();
        assert_eq!(back, out.graph);
        assert_eq!(back.serialize(), bytes);
    }
}

#[test]
fn handler_monotonicity() {
    for name in all_fixtures() {
        let b = backend(&name);
        let (on, on_tasks) = run(&b, &config(HandlerSet::ALL));
        let (off, off_tasks) = run(&b, &config(HandlerSet::NONE));
        assert!(on_tasks.len() >= off_tasks.len(), "{name}: {} < {}", on_tasks.len(), off_tasks.len());
        let (r_on, r_off) = (duplicate_rate(&on.graph, &on.report), duplicate_rate(&off.graph, &off.report));
        assert!(r_on <= r_off, "{name}: {r_on} > {r_off}");
    }
}

#[test]
fn handlers_off_counts_nothing() {
    for name in QUIRKY {
        let (out, _) = run(&backend(name), &config(HandlerSet::NONE));
        let mut expected: Vec<String> = HANDLER_NAMES.iter().map(|s| s.to_string()).collect();
        expected.sort();
        assert_eq!(out.report.handler_counters.keys().cloned().collect::<Vec<_>>(), expected);
        assert_eq!(out.report.handler_total(), 0, "{name}");
    }
}

#[test]
fn quirky_fixtures_exercise_every_handler() {
    for name in QUIRKY {
        let (out, _) = run(&backend(name), &config(HandlerSet::ALL));
        for h in HANDLER_NAMES {
            assert!(out.report.handler_counters[&h.to_string()] > 0, "{name}: handler {h} never fired");
        }
    }
}

/// Replays every edge on the simulator and keeps those whose end state
/// really differs from the start state, one per (from, to, action string).
fn bruteforce_kept(b: &dyn SessionFactory, g: &InteractionGraph) -> usize {
    let mut kept = BTreeSet::new();
    for e in &g.edges {
        let from = &g.nodes[&e.from_node];
        let mut s = b.replay(&from.entry_path).unwrap();
        let before = s.observe().unwrap();
        let mut after = before.clone();
        for a in &e.steps {
            after = s.perform(a).unwrap().observation;
        }
        let h = |t: &axcrawl::ax::AxTree| canonical_hash(t, HashMode::Strict);
        if h(&before.tree) != h(&after.tree) && h(&g.nodes[&e.out_vertex].state.tree) != h(&before.tree) {
            kept.insert((e.from_node, e.out_vertex, format_action(&e.action).unwrap()));
        }
    }
    kept.len()
}

#[test]
fn kept_edges_match_replayed_transitions() {
    for name in QUIRKY {
        let b = backend(name);
        for h in [HandlerSet::ALL, HandlerSet::NONE] {
            let (out, _) = run(&b, &config(h));
            assert_eq!(filter_noop_edges(&out.graph).len(), bruteforce_kept(&b, &out.graph), "{name}");
        }
    }
}

#[test]
fn node_images_follow_ids() {
    let (out, _) = run(&backend("weather"), &CrawlerConfig::default());
    for (id, n) in &out.graph.nodes {
        assert_eq!(n.state.image_name, format!("screen_{id:06}.ppm"));
    }
}

#[test]
fn login_page_halts_with_flag() {
    let mut s = spec("linear");
    let page = s.states.get_mut("license").unwrap();
    let mut root = page.tree.root().clone();
    root.children.push(axcrawl::ax::UiElement::new(900, "AXSecureTextField", axcrawl::ax::BBox::of(300.0, 300.0, 200.0, 24.0)).with_description("Password"));
    page.tree = axcrawl::ax::AxTree::new(root, page.tree.window_bbox()).unwrap();
    let (out, _) = run(&axcrawl::sim::SimBackend::new(s), &CrawlerConfig::default());
    assert_eq!(out.report.halted_reason, HaltedReason::LoginFlagged);
}

