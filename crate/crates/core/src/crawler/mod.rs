//! Breadth-first exploration of an application into an interaction graph.

mod config;
pub mod handlers;
mod planner;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::time::{Duration, Instant};

use crate::agents::AgentSuite;
use crate::ax::{canonical_hash, diff, ActionSpec, HashMode, ScreenState, TreeDiff, UiElement};
use crate::backend::{BackendError, SessionFactory};
use crate::graph::{GraphNode, InteractionGraph, SafeAction};
use crate::sim::is_text_role;

pub use config::{ConfigError, CrawlReport, CrawlerConfig, HaltedReason, HandlerSet, SignificanceMode, HANDLER_NAMES};
pub use handlers::{
    filter_invisible, handle_popup, is_menu_anchor, resolve_empty_elements, unroll_menus, MenuProbe, PopupPlan,
};
pub use planner::{candidate_for, check_plan, plan_actions, Candidate, Force, PlanInvalid, PlannedActions};

/// True iff more than `threshold` elements were added and removed in total.
pub fn is_significant(d: &TreeDiff, threshold: u32) -> bool {
    is_significant_with(d, threshold, SignificanceMode::Joint)
}

pub fn is_significant_with(d: &TreeDiff, threshold: u32, mode: SignificanceMode) -> bool {
    let t = threshold as usize;
    match mode {
        SignificanceMode::Joint => d.structural_delta() > t,
        SignificanceMode::EitherAlone => d.added.len() > t || d.removed.len() > t,
    }
}

pub fn image_name(node_id: u32) -> String {
    format!("screen_{node_id:06}.ppm")
}

#[derive(Debug)]
pub struct CrawlOutcome {
    pub graph: InteractionGraph,
    pub report: CrawlReport,
    /// Set when the backend died mid-crawl; graph and report are partial.
    pub failure: Option<BackendError>,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Normal,
    /// A state with an open (sub)menu; only elements absent from `prior`
    /// are explored.
    MenuExpanded { prior: BTreeSet<u32> },
}

enum Stop {
    Budget,
    Login,
    Backend(BackendError),
}

impl From<BackendError> for Stop {
    fn from(e: BackendError) -> Self {
        Stop::Backend(e)
    }
}

struct Crawler<'a> {
    factory: &'a dyn SessionFactory,
    config: &'a CrawlerConfig,
    agents: &'a AgentSuite,
    graph: InteractionGraph,
    report: CrawlReport,
    index: HashMap<u64, u32>,
    kinds: BTreeMap<u32, NodeKind>,
    queue: VecDeque<(u32, u32)>,
    start: Instant,
    budget: Duration,
    depth_exhausted: bool,
}

/// Explores the application behind `factory`. Fails only if the very first
/// observation cannot be made; later backend failures end the crawl early
/// and are reported in the outcome.
pub fn crawl(factory: &dyn SessionFactory, config: &CrawlerConfig, agents: &AgentSuite) -> Result<CrawlOutcome, BackendError> {
    let start = Instant::now();
    let mut s = factory.start()?;
    let mut root = s.observe()?;
    s.close();
    root.image_name = image_name(0);
    let root_hash = canonical_hash(&root.tree, HashMode::LayoutInsensitive);
    let app = factory.app_name();
    let mut c = Crawler {
        factory,
        config,
        agents,
        graph: InteractionGraph::new(app.clone(), factory.genre(), root),
        report: CrawlReport::new(app),
        index: HashMap::from([(root_hash, 0)]),
        kinds: BTreeMap::from([(0, NodeKind::Normal)]),
        queue: VecDeque::from([(0, 0)]),
        start,
        budget: Duration::from_secs(config.max_duration_minutes.saturating_mul(60)),
        depth_exhausted: false,
    };
    let stop = c.run().err();
    let mut failure = None;
    c.report.halted_reason = match stop {
        Some(Stop::Backend(e)) => {
            failure = Some(e);
            HaltedReason::BackendFailure
        }
        Some(Stop::Login) => HaltedReason::LoginFlagged,
        Some(Stop::Budget) => HaltedReason::Budget,
        None if c.depth_exhausted => HaltedReason::DepthExhausted,
        None => HaltedReason::Complete,
    };
    c.report.elapsed_secs = c.start.elapsed().as_secs_f64();
    Ok(CrawlOutcome { graph: c.graph, report: c.report, failure })
}

impl Crawler<'_> {
    fn run(&mut self) -> Result<(), Stop> {
        while let Some((nid, depth)) = self.queue.pop_front() {
            self.expand(nid, depth)?;
        }
        Ok(())
    }

    fn check_budget(&self) -> Result<(), Stop> {
        if self.start.elapsed() >= self.budget {
            Err(Stop::Budget)
        } else {
            Ok(())
        }
    }

    /// Actionable elements of a node after the enabled handlers ran.
    fn presented(&mut self, state: &ScreenState, kind: &NodeKind) -> (Vec<UiElement>, Option<PopupPlan>) {
        let h = self.config.handlers;
        let root_id = state.tree.root().id;
        let all_leaves: Vec<UiElement> =
            state.tree.flatten().into_iter().filter(|e| e.id != root_id && e.is_leaf()).map(UiElement::shallow).collect();
        let mut elements = if h.invisible {
            let visible = filter_invisible(state);
            let non_root = state.tree.element_count() as u64 - 1;
            self.report.bump("invisible", non_root - visible.len() as u64);
            visible.into_iter().filter(|e| state.tree.find(e.id).is_some_and(UiElement::is_leaf)).collect()
        } else {
            all_leaves
        };
        if h.empty {
            let (kept, touched) = resolve_empty_elements(elements);
            self.report.bump("empty", touched);
            elements = kept;
        }
        if let NodeKind::MenuExpanded { prior } = kind {
            elements.retain(|e| !prior.contains(&e.id));
        }
        let popup = if h.popup { handle_popup(state) } else { None };
        if let Some(p) = &popup {
            let inside: BTreeSet<u32> =
                state.tree.find(p.root_id).map(|r| r.iter().map(|e| e.id).collect()).unwrap_or_default();
            elements.retain(|e| inside.contains(&e.id) && e.id != p.dismiss.id);
        }
        (elements, popup)
    }

    fn expand(&mut self, nid: u32, depth: u32) -> Result<(), Stop> {
        let GraphNode { state, entry_path, .. } = self.graph.node(nid).expect("queued node exists").clone();
        let kind = self.kinds.get(&nid).cloned().unwrap_or(NodeKind::Normal);
        let (elements, popup) = self.presented(&state, &kind);
        if depth >= self.config.max_depth {
            if !elements.is_empty() || popup.is_some() {
                self.depth_exhausted = true;
            }
            return Ok(());
        }
        if popup.is_some() {
            self.report.bump("popup", 1);
        }
        let plan = plan_actions(&state, &elements, self.config, self.agents);
        if plan.login_page {
            return Err(Stop::Login);
        }
        let inputs = if plan.order.iter().any(|e| is_text_role(&e.role)) {
            if self.config.agent_usage {
                self.agents.input_agent(&state)
            } else {
                plan.order.iter().map(|e| (e.id, self.config.default_text.clone())).collect()
            }
        } else {
            BTreeMap::new()
        };
        let in_menu = matches!(kind, NodeKind::MenuExpanded { .. });
        for el in &plan.order {
            self.check_budget()?;
            if self.config.handlers.menu && !in_menu && is_menu_anchor(el) {
                let probes = unroll_menus(self.factory, &entry_path, std::slice::from_ref(el), self.config.cursor_move_before_click)?;
                for p in probes {
                    self.report.actions_executed += p.steps.len() as u64 + u64::from(p.restored.is_some());
                    if p.restored == Some(false) {
                        self.report.restore_failures += 1;
                        log::warn!("{}: menu {} did not close cleanly", self.graph.app_name, p.anchor.id);
                    }
                    let cand = candidate_for(&p.anchor, &inputs, self.config, Force::Expansion);
                    self.record(nid, depth, &cand, &p.before, p.after);
                }
                continue;
            }
            let force = if in_menu { Force::Expansion } else { Force::None };
            let cand = candidate_for(el, &inputs, self.config, force);
            let (before, after) = self.execute(&entry_path, &cand.steps)?;
            self.record(nid, depth, &cand, &before, after);
        }
        if let Some(p) = popup {
            self.check_budget()?;
            let cand = candidate_for(&p.dismiss, &inputs, self.config, Force::PopupDismiss);
            let (before, after) = self.execute(&entry_path, &cand.steps)?;
            self.record(nid, depth, &cand, &before, after);
        }
        Ok(())
    }

    fn execute(&mut self, entry_path: &[ActionSpec], steps: &[ActionSpec]) -> Result<(ScreenState, ScreenState), Stop> {
        let mut s = self.factory.replay(entry_path)?;
        let before = s.observe()?;
        let mut after = before.clone();
        for a in steps {
            after = s.perform(a)?.observation;
        }
        s.close();
        self.report.actions_executed += steps.len() as u64;
        Ok((before, after))
    }

    fn record(&mut self, nid: u32, depth: u32, cand: &Candidate, before: &ScreenState, mut after: ScreenState) {
        let d = diff(&before.tree, &after.tree);
        let forced = match cand.force {
            Force::None => false,
            Force::PopupDismiss => !d.removed.is_empty(),
            Force::Expansion => handlers::is_expansion(&d),
        };
        if !forced && !is_significant_with(&d, self.config.significant_change_threshold, self.config.significance_mode) {
            self.report.safe_actions += 1;
            self.graph.node_mut(nid).expect("node exists").safe_actions.push(SafeAction {
                action: cand.action.clone(),
                steps: cand.steps.clone(),
                action_description: cand.description.clone(),
                observable_change: !d.is_empty(),
            });
            return;
        }
        let expanded = forced && cand.force == Force::Expansion;
        if expanded {
            self.report.bump("menu", 1);
        }
        self.report.edges_created += 1;
        let h = canonical_hash(&after.tree, HashMode::LayoutInsensitive);
        if let Some(&existing) = self.index.get(&h) {
            self.report.duplicates_linked += 1;
            self.graph.link(nid, existing, cand.action.clone(), cand.description.clone(), cand.steps.clone());
            return;
        }
        let next_id = self.graph.nodes.keys().next_back().map_or(0, |k| k + 1);
        after.image_name = image_name(next_id);
        let id = self.graph.add_child(nid, cand.action.clone(), cand.description.clone(), cand.steps.clone(), after);
        debug_assert_eq!(id, next_id);
        let kind = if expanded {
            NodeKind::MenuExpanded { prior: before.tree.flatten().iter().map(|e| e.id).collect() }
        } else {
            NodeKind::Normal
        };
        self.kinds.insert(id, kind);
        self.index.insert(h, id);
        self.report.nodes_created += 1;
        self.queue.push_back((id, depth + 1));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ax::ElementSignature;

    fn delta(added: usize, removed: usize) -> TreeDiff {
        let sig = |p: &str, i: usize| ElementSignature(format!("{p}{i}"));
        TreeDiff {
            added: (0..added).map(|i| sig("a", i)).collect(),
            removed: (0..removed).map(|i| sig("r", i)).collect(),
            changed: BTreeSet::new(),
        }
    }

    #[test]
    fn significance_boundary() {
        assert!(!is_significant(&delta(10, 0), 10));
        assert!(is_significant(&delta(11, 0), 10));
        assert!(is_significant(&delta(6, 5), 10));
        assert!(!is_significant(&delta(0, 0), 10));
        assert!(!is_significant_with(&delta(6, 5), 10, SignificanceMode::EitherAlone));
        assert!(is_significant_with(&delta(0, 11), 10, SignificanceMode::EitherAlone));
    }
}
