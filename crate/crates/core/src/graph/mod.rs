//! Interaction graphs: nodes are observed UI states, edges the actions that
//! caused a significant change between them.

mod export;
mod metrics;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ax::{ActionSpec, ScreenState};

pub use export::{export_dot, export_svg};
pub use metrics::{depth, duplicate_rate, duplicate_ratio, node_depths};

/// An action that did not cause a significant change at its node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafeAction {
    /// The interaction itself (click target, typed text, ...).
    pub action: ActionSpec,
    /// Full step sequence executed from the node state, including `action`.
    pub steps: Vec<ActionSpec>,
    pub action_description: String,
    /// Whether the tree observably changed at all.
    pub observable_change: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphNode {
    pub id: u32,
    pub state: ScreenState,
    pub safe_actions: Vec<SafeAction>,
    /// Steps that reach this state from a fresh session.
    pub entry_path: Vec<ActionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEdge {
    pub from_node: u32,
    pub action: ActionSpec,
    pub action_description: String,
    pub out_vertex: u32,
    pub steps: Vec<ActionSpec>,
    pub self_loop: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    pub app_name: String,
    pub genre: String,
    pub root: u32,
    pub nodes: BTreeMap<u32, GraphNode>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    app_name: String,
    genre: String,
    root: u32,
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
}

#[derive(Debug, thiserror::Error)]
#[error("graph parse error at {path}: {message}")]
pub struct ParseError {
    pub path: String,
    pub message: String,
}

impl InteractionGraph {
    pub fn new(app_name: impl Into<String>, genre: impl Into<String>, root_state: ScreenState) -> Self {
        let root = GraphNode { id: 0, state: root_state, safe_actions: Vec::new(), entry_path: Vec::new() };
        Self {
            app_name: app_name.into(),
            genre: genre.into(),
            root: 0,
            nodes: BTreeMap::from([(0, root)]),
            edges: Vec::new(),
        }
    }

    pub fn node(&self, id: u32) -> Option<&GraphNode> {
        self.nodes.get(&id)
    }

    pub fn node_mut(&mut self, id: u32) -> Option<&mut GraphNode> {
        self.nodes.get_mut(&id)
    }

    /// Adds a new state reached from `from` by `steps`; returns its id.
    pub fn add_child(
        &mut self,
        from: u32,
        action: ActionSpec,
        action_description: String,
        steps: Vec<ActionSpec>,
        state: ScreenState,
    ) -> u32 {
        let parent = self.nodes.get(&from).expect("edge source exists");
        let mut entry_path = parent.entry_path.clone();
        entry_path.extend(steps.iter().cloned());
        let id = self.nodes.keys().next_back().map_or(0, |k| k + 1);
        self.nodes.insert(id, GraphNode { id, state, safe_actions: Vec::new(), entry_path });
        self.edges.push(GraphEdge { from_node: from, action, action_description, out_vertex: id, steps, self_loop: false });
        id
    }

    /// Adds an edge into an already known state.
    pub fn link(&mut self, from: u32, to: u32, action: ActionSpec, action_description: String, steps: Vec<ActionSpec>) {
        assert!(self.nodes.contains_key(&from) && self.nodes.contains_key(&to), "edge endpoints exist");
        self.edges.push(GraphEdge { from_node: from, action, action_description, out_vertex: to, steps, self_loop: from == to });
    }

    pub fn outgoing(&self, id: u32) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.from_node == id)
    }

    pub fn reachable(&self) -> BTreeSet<u32> {
        let mut seen = BTreeSet::from([self.root]);
        let mut q = VecDeque::from([self.root]);
        while let Some(n) = q.pop_front() {
            for e in self.outgoing(n) {
                if seen.insert(e.out_vertex) {
                    q.push_back(e.out_vertex);
                }
            }
        }
        seen
    }

    /// Canonical JSON: nodes sorted by id, fixed field order.
    pub fn serialize(&self) -> Vec<u8> {
        let raw = RawGraph {
            app_name: self.app_name.clone(),
            genre: self.genre.clone(),
            root: self.root,
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.clone(),
        };
        let mut out = serde_json::to_vec_pretty(&raw).expect("graph serialization is infallible");
        out.push(b'\n');
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, ParseError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let raw: RawGraph = serde_path_to_error::deserialize(de)
            .map_err(|e| ParseError { path: e.path().to_string(), message: e.inner().to_string() })?;
        let err = |path: String, message: &str| ParseError { path, message: message.to_string() };
        let mut nodes = BTreeMap::new();
        for (i, n) in raw.nodes.into_iter().enumerate() {
            let id = n.id;
            if nodes.insert(id, n).is_some() {
                return Err(err(format!("nodes[{i}].id"), "duplicate node id"));
            }
        }
        if !nodes.contains_key(&raw.root) {
            return Err(err("root".into(), "root node missing"));
        }
        for (i, e) in raw.edges.iter().enumerate() {
            if !nodes.contains_key(&e.from_node) {
                return Err(err(format!("edges[{i}].from_node"), "unknown node"));
            }
            if !nodes.contains_key(&e.out_vertex) {
                return Err(err(format!("edges[{i}].out_vertex"), "unknown node"));
            }
            if (e.from_node == e.out_vertex) != e.self_loop {
                return Err(err(format!("edges[{i}].self_loop"), "self-loop flag disagrees with endpoints"));
            }
        }
        let g = InteractionGraph { app_name: raw.app_name, genre: raw.genre, root: raw.root, nodes, edges: raw.edges };
        if let Some(orphan) = g.nodes.keys().find(|id| !g.reachable().contains(id)) {
            return Err(err(format!("nodes[id={orphan}]"), "node unreachable from root"));
        }
        Ok(g)
    }
}
