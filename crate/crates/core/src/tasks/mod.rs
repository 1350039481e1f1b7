//! Turning interaction graphs into grounded task records.

pub(crate) mod dataset;
mod replay;
mod split;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::agents::{deterministic_input_task, element_category_for_role, AgentSuite, TaskCategory};
use crate::ax::{canonical_hash, diff, ActionKind, ActionSpec, HashMode, MalformedAction, Point, ScreenState, UiElement};
use crate::backend::SessionFactory;
use crate::crawler::is_significant;
use crate::graph::{GraphEdge, GraphNode, InteractionGraph};
use crate::sim::{highlight, render};

pub use dataset::{from_jsonl, read_dataset, to_jsonl, write_dataset, DatasetError};
pub use replay::{verify_replay, ReplayMismatch};
pub use split::{split, SplitError, SplitManifest, SplitOutput, DEFAULT_TEST_FRACTION};

/// One grounded task. Field order is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub screen_id: u64,
    pub app_name: String,
    pub task: String,
    pub raw_action: String,
    /// `left click, (x, y)` in image pixels, or `type <text>`.
    pub action: String,
    pub element_data: UiElement,
    pub scaling_factor: f64,
    pub original_task: bool,
    /// Accessibility tree JSON of the screen the action is taken on.
    pub a11y_path: String,
    pub image_ref: String,
    pub cropped_image_ref: String,
    pub task_category: String,
    pub element_category: String,
    /// Steps from a fresh session to the screen, in points.
    pub replay_path: Vec<ActionSpec>,
}

fn coord(v: f64) -> i64 {
    v.round() as i64
}

/// `left click, (x, y)`, `type <text>`, `press enter` or `move, (x, y)`.
pub fn format_action(a: &ActionSpec) -> Result<String, MalformedAction> {
    let bad = |reason| MalformedAction { kind: a.kind, reason };
    Ok(match a.kind {
        ActionKind::Click => {
            let p = a.point.ok_or_else(|| bad("missing point"))?;
            format!("left click, ({}, {})", coord(p.x), coord(p.y))
        }
        ActionKind::Move => {
            let p = a.point.ok_or_else(|| bad("missing point"))?;
            format!("move, ({}, {})", coord(p.x), coord(p.y))
        }
        ActionKind::Type => format!("type {}", a.text.as_deref().ok_or_else(|| bad("missing text"))?),
        ActionKind::PressEnter => "press enter".to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unrecognised action {0:?}")]
pub struct UnparseableAction(pub String);

fn parse_point(s: &str) -> Option<Point> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    Some(Point::new(x.trim().parse().ok()?, y.trim().parse().ok()?))
}

/// Inverse of [`format_action`]; the parsed action carries no target id.
pub fn parse_action(s: &str) -> Result<ActionSpec, UnparseableAction> {
    let bad = || UnparseableAction(s.to_string());
    if let Some(rest) = s.strip_prefix("left click,") {
        return parse_point(rest).map(|p| ActionSpec::click(None, p)).ok_or_else(bad);
    }
    if let Some(rest) = s.strip_prefix("move,") {
        return parse_point(rest).map(|p| ActionSpec::move_to(None, p)).ok_or_else(bad);
    }
    if let Some(text) = s.strip_prefix("type ") {
        return Ok(ActionSpec { kind: ActionKind::Type, target_id: None, point: None, text: Some(text.to_string()) });
    }
    if s == "press enter" {
        return Ok(ActionSpec::press_enter());
    }
    Err(bad())
}

/// Edges whose endpoints differ, one per (source, target, action).
pub fn filter_noop_edges(g: &InteractionGraph) -> Vec<GraphEdge> {
    let hash = |id: u32| g.nodes.get(&id).map(|n| canonical_hash(&n.state.tree, HashMode::Strict));
    let mut seen = HashSet::new();
    g.edges
        .iter()
        .filter(|e| hash(e.from_node) != hash(e.out_vertex))
        .filter(|e| {
            let key = (e.from_node, e.out_vertex, format_action(&e.action).unwrap_or_default());
            seen.insert(key)
        })
        .cloned()
        .collect()
}

pub fn screen_ref(app: &str, node: &GraphNode) -> String {
    format!("images/{app}/{}", node.state.image_name)
}

pub fn crop_ref(app: &str, index: usize) -> String {
    format!("images/{app}/crop_{index:06}.ppm")
}

#[derive(Default)]
pub struct SynthesisOptions<'a> {
    /// Offset for screen ids, so several apps can share one dataset.
    pub screen_id_base: u64,
    /// Live backend used to confirm agent-invented input text. Without it
    /// only crawl-time text is used.
    pub acceptor: Option<&'a dyn SessionFactory>,
}

/// One interaction that may become a record.
struct Source<'g> {
    node: &'g GraphNode,
    action: &'g ActionSpec,
    steps: &'g [ActionSpec],
    description: &'g str,
    after: Option<&'g ScreenState>,
    original: bool,
}

/// Click tasks first, then text-input tasks, each over crawl edges and then
/// over observable safe actions. Screen ids are dense over the screens that
/// produce at least one record, in node order.
pub fn synthesize(g: &InteractionGraph, agents: &AgentSuite, opts: &SynthesisOptions) -> Vec<TaskRecord> {
    let kept = filter_noop_edges(g);
    let mut sources: Vec<Source> = Vec::new();
    for node in g.nodes.values() {
        for e in kept.iter().filter(|e| e.from_node == node.id) {
            sources.push(Source {
                node,
                action: &e.action,
                steps: &e.steps,
                description: &e.action_description,
                after: g.node(e.out_vertex).map(|n| &n.state),
                original: true,
            });
        }
    }
    for node in g.nodes.values() {
        for s in node.safe_actions.iter().filter(|s| s.observable_change) {
            sources.push(Source {
                node,
                action: &s.action,
                steps: &s.steps,
                description: &s.action_description,
                after: None,
                original: false,
            });
        }
    }

    let mut drafts: Vec<(u32, TaskRecord)> = Vec::new();
    let mut seen: HashSet<(u32, String)> = HashSet::new();
    for phase in [ActionKind::Click, ActionKind::Type] {
        for src in sources.iter().filter(|s| s.action.kind == phase) {
            let Some(rec) = make_record(g, src, agents, opts, drafts.len()) else { continue };
            if seen.insert((src.node.id, rec.action.clone())) {
                drafts.push((src.node.id, rec));
            }
        }
    }

    let mut dense: BTreeMap<u32, u64> = BTreeMap::new();
    for (nid, _) in &drafts {
        dense.entry(*nid).or_insert(0);
    }
    for (i, v) in dense.values_mut().enumerate() {
        *v = opts.screen_id_base + i as u64;
    }
    drafts
        .into_iter()
        .map(|(nid, mut r)| {
            r.screen_id = dense[&nid];
            r
        })
        .collect()
}

fn make_record(g: &InteractionGraph, src: &Source, agents: &AgentSuite, opts: &SynthesisOptions, index: usize) -> Option<TaskRecord> {
    let state = &src.node.state;
    let full_target = state.tree.find(src.action.target_id?)?;
    if src.action.kind == ActionKind::Click && !lands_on(&state.tree, full_target, src.action.point?) {
        return None;
    }
    let target = full_target.shallow();
    let images = agents.has_client().then(|| {
        let (full, crop) = highlight(state, &target.bbox);
        (full.to_ppm(), crop.to_ppm())
    });
    let (full, crop) = match &images {
        Some((f, c)) => (Some(f.as_slice()), Some(c.as_slice())),
        None => (None, None),
    };
    let action_pos = src.steps.iter().position(|s| s == src.action).unwrap_or(src.steps.len());
    let mut replay_path = src.node.entry_path.clone();
    replay_path.extend_from_slice(&src.steps[..action_pos]);

    let (task, action, task_category, element_category) = match src.action.kind {
        ActionKind::Click => {
            let ann = agents.click_task_agent(full, crop, &target, state, src.after);
            if ann.is_rejected() {
                return None;
            }
            let p = src.action.point?.scaled(state.scaling_factor);
            let action = format_action(&ActionSpec::click(None, p)).ok()?;
            let tc = ann.task_category.map(|c| c.to_string()).unwrap_or_default();
            let ec = ann.element_category.map(|c| c.to_string()).unwrap_or_default();
            (ann.task, action, tc, ec)
        }
        ActionKind::Type => {
            let crawl_text = src.action.text.as_deref()?;
            let fallback = deterministic_input_task(&target, crawl_text);
            let ann = match agents.input_task_agent(src.description, full, crop, &target, crawl_text) {
                Ok(a) if a.text() == crawl_text => a,
                Ok(a) if accepts_text(src, a.text(), opts) => a,
                _ => fallback,
            };
            let ec = element_category_for_role(&target.role).to_string();
            (ann.task.clone(), ann.action.clone(), TaskCategory::Input.to_string(), ec)
        }
        _ => return None,
    };
    Some(TaskRecord {
        screen_id: 0,
        app_name: g.app_name.clone(),
        task,
        raw_action: src.description.to_string(),
        action,
        element_data: target,
        scaling_factor: state.scaling_factor,
        original_task: src.original,
        a11y_path: state.tree.to_json(),
        image_ref: screen_ref(&g.app_name, src.node),
        cropped_image_ref: crop_ref(&g.app_name, index),
        task_category,
        element_category,
        replay_path,
    })
}

/// Whether a click at `p` reaches `target` rather than something painted
/// over it, such as an open popup.
fn lands_on(tree: &crate::ax::AxTree, target: &crate::ax::UiElement, p: crate::ax::Point) -> bool {
    tree.topmost(p).is_some_and(|hit| target.find(hit.id).is_some())
}

/// Replays the source with `text` in place of the crawl-time text and checks
/// that the outcome is the one recorded at crawl time.
fn accepts_text(src: &Source, text: &str, opts: &SynthesisOptions) -> bool {
    let Some(factory) = opts.acceptor else { return false };
    let steps: Vec<ActionSpec> = src
        .steps
        .iter()
        .map(|s| if s == src.action { ActionSpec { text: Some(text.to_string()), ..s.clone() } } else { s.clone() })
        .collect();
    let run = || -> Option<(ScreenState, ScreenState)> {
        let mut s = factory.replay(&src.node.entry_path).ok()?;
        let before = s.observe().ok()?;
        let mut after = before.clone();
        for a in &steps {
            after = s.perform(a).ok()?.observation;
        }
        s.close();
        Some((before, after))
    };
    let Some((before, after)) = run() else { return false };
    match src.after {
        Some(expected) => {
            canonical_hash(&after.tree, HashMode::LayoutInsensitive) == canonical_hash(&expected.tree, HashMode::LayoutInsensitive)
        }
        None => {
            let d = diff(&before.tree, &after.tree);
            !d.is_empty() && !is_significant(&d, 10)
        }
    }
}

/// Screens and crops referenced by `records`, as (relative path, PPM bytes).
pub fn render_assets(g: &InteractionGraph, records: &[TaskRecord]) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut screens = HashSet::new();
    let by_ref: BTreeMap<String, &GraphNode> = g.nodes.values().map(|n| (screen_ref(&g.app_name, n), n)).collect();
    for n in g.nodes.values() {
        let r = screen_ref(&g.app_name, n);
        if screens.insert(r.clone()) {
            out.push((r, render(&n.state).to_ppm()));
        }
    }
    for r in records {
        if let Some(n) = by_ref.get(&r.image_ref) {
            let (_, crop) = highlight(&n.state, &r.element_data.bbox);
            out.push((r.cropped_image_ref.clone(), crop.to_ppm()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_strings() {
        let click = ActionSpec::click(None, Point::new(100.0, 200.0));
        assert_eq!(format_action(&click).unwrap(), "left click, (100, 200)");
        assert_eq!(format_action(&ActionSpec::type_text(1, "DEFAULT")).unwrap(), "type DEFAULT");
        assert_eq!(format_action(&ActionSpec::press_enter()).unwrap(), "press enter");
        assert_eq!(format_action(&ActionSpec::move_to(None, Point::new(3.4, 5.6))).unwrap(), "move, (3, 6)");
        let broken = ActionSpec { kind: ActionKind::Click, target_id: None, point: None, text: None };
        assert!(format_action(&broken).is_err());
    }

    #[test]
    fn parse_inverts_format() {
        for s in ["left click, (100, 200)", "type hello world", "press enter", "move, (0, 7)", "type  two spaces"] {
            assert_eq!(format_action(&parse_action(s).unwrap()).unwrap(), s);
        }
        assert!(parse_action("press the button").is_err());
    }
}
