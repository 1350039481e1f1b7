use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::ax::{canonical_hash, ActionKind, ActionSpec, AxTree, HashMode, Point, ScreenState, UiElement};
use crate::backend::{BackendError, Session, SessionFactory, StepOutcome};

use super::quirks::apply_quirks;
use super::spec::{AppSpec, StateSpec};

const TEXT_ROLES: &[&str] = &["AXTextField", "AXSearchField", "AXTextArea", "AXComboBox", "AXSecureTextField"];

pub fn is_text_role(role: &str) -> bool {
    TEXT_ROLES.contains(&role)
}

/// A live run of a simulated application. Single owner; not shareable.
#[derive(Debug, Clone)]
pub struct SimSession {
    spec: Arc<AppSpec>,
    current_state: String,
    open_popup: bool,
    open_menus: Vec<u32>,
    typed_values: BTreeMap<u32, String>,
    focused: Option<u32>,
    step_counter: u64,
    visited: BTreeSet<String>,
    closed: bool,
}

pub fn start_session(spec: Arc<AppSpec>) -> SimSession {
    let initial = spec.initial_state.clone();
    let mut s = SimSession {
        spec,
        current_state: String::new(),
        open_popup: false,
        open_menus: Vec::new(),
        typed_values: BTreeMap::new(),
        focused: None,
        step_counter: 0,
        visited: BTreeSet::new(),
        closed: false,
    };
    s.enter(&initial);
    s
}

impl SimSession {
    pub fn current_state(&self) -> &str {
        &self.current_state
    }

    pub fn open_popup(&self) -> bool {
        self.open_popup
    }

    pub fn open_menus(&self) -> &[u32] {
        &self.open_menus
    }

    pub fn typed_values(&self) -> &BTreeMap<u32, String> {
        &self.typed_values
    }

    pub fn step_counter(&self) -> u64 {
        self.step_counter
    }

    fn state_spec(&self) -> &StateSpec {
        self.spec.states.get(&self.current_state).expect("validated state id")
    }

    fn enter(&mut self, state: &str) {
        let first = self.visited.insert(state.to_string());
        self.current_state = state.to_string();
        let popup = self.state_spec().popup.as_ref().map(|p| p.repeat || first).unwrap_or(false);
        self.open_popup = popup;
        self.open_menus.clear();
        self.typed_values.clear();
        self.focused = None;
    }

    fn base_with_values(&self) -> UiElement {
        let mut root = self.state_spec().tree.root().clone();
        for (id, v) in &self.typed_values {
            if let Some(e) = root.find_mut(*id) {
                e.value = Some(v.clone());
            }
        }
        root
    }

    fn menu_fragment(&self, anchor: u32) -> &UiElement {
        &self.state_spec().menu_for(anchor).expect("open menus are validated anchors").fragment
    }

    /// The tree as it really is, before accessibility defects.
    pub fn true_tree(&self) -> AxTree {
        let state = self.state_spec();
        let mut root = self.base_with_values();
        for anchor in &self.open_menus {
            root.children.push(self.menu_fragment(*anchor).clone());
        }
        if self.open_popup {
            if let Some(p) = &state.popup {
                root.children.push(p.fragment.clone());
            }
        }
        AxTree::new(root, state.tree.window_bbox()).expect("composed tree keeps unique ids")
    }

    pub fn observe_state(&self) -> ScreenState {
        let state = self.state_spec();
        let truth = self.true_tree();
        let tree = apply_quirks(&self.spec, &self.current_state, truth, self.menu_and_popup_count());
        ScreenState {
            tree,
            image_name: format!("screen_{:06}.ppm", self.step_counter),
            scaling_factor: state.scaling_factor,
        }
    }

    fn menu_and_popup_count(&self) -> usize {
        self.open_menus.len() + usize::from(self.open_popup)
    }

    fn fire(&mut self, chain: &[u32], kind: ActionKind) -> bool {
        // Innermost element first, bubbling to its ancestors.
        for id in chain.iter().rev() {
            let typed = self.typed_values.get(id).map(String::as_str).unwrap_or("");
            let hit = self.spec.transitions.iter().find(|t| {
                t.from_state == self.current_state
                    && t.trigger.element_id == *id
                    && t.trigger.kind == kind
                    && t.trigger.requires_text.as_ref().is_none_or(|p| p.accepts(typed))
            });
            if let Some(t) = hit {
                let to = t.to_state.clone();
                self.enter(&to);
                return true;
            }
        }
        false
    }

    /// The element a click at `p` would act on, honouring popup and menu
    /// modality. `None` when the click would be swallowed.
    pub fn hit_target(&self, p: Point) -> Option<u32> {
        let window = self.state_spec().tree.window_bbox();
        if self.open_popup {
            let popup = self.state_spec().popup.as_ref()?;
            return hit_chain(&popup.fragment, window, p)?.last().copied();
        }
        for anchor in self.open_menus.iter().rev() {
            if let Some(chain) = hit_chain(self.menu_fragment(*anchor), window, p) {
                return chain.last().copied();
            }
        }
        if !self.open_menus.is_empty() {
            return None;
        }
        hit_chain(&self.base_with_values(), window, p)?.last().copied()
    }

    fn click(&mut self, p: Point) {
        let window = self.state_spec().tree.window_bbox();
        if self.open_popup {
            let popup = self.state_spec().popup.clone().expect("open popup has a spec");
            let Some(chain) = hit_chain(&popup.fragment, window, p) else {
                return;
            };
            if chain.contains(&popup.dismiss_id) {
                self.open_popup = false;
                return;
            }
            self.fire(&chain, ActionKind::Click);
            return;
        }
        if !self.open_menus.is_empty() {
            for level in (0..self.open_menus.len()).rev() {
                let frag = self.menu_fragment(self.open_menus[level]).clone();
                if let Some(chain) = hit_chain(&frag, window, p) {
                    let hit = *chain.last().expect("non-empty chain");
                    if self.state_spec().menu_for(hit).is_some() {
                        self.open_menus.truncate(level + 1);
                        self.open_menus.push(hit);
                        return;
                    }
                    self.open_menus.clear();
                    self.fire(&chain, ActionKind::Click);
                    return;
                }
            }
            self.open_menus.clear();
            return;
        }
        let base = self.base_with_values();
        let Some(chain) = hit_chain(&base, window, p) else {
            return;
        };
        let hit = *chain.last().expect("non-empty chain");
        let el = base.find(hit).expect("hit is in tree");
        if !el.enabled {
            return;
        }
        if is_text_role(&el.role) {
            self.focused = Some(hit);
        }
        if let Some(anchor) = chain.iter().rev().find(|id| self.state_spec().menu_for(**id).is_some()) {
            self.open_menus = vec![*anchor];
            return;
        }
        self.fire(&chain, ActionKind::Click);
    }

    fn type_into(&mut self, target: u32, text: &str) {
        let truth = self.true_tree();
        let Some(el) = truth.find(target) else {
            return;
        };
        if !el.enabled {
            return;
        }
        if self.open_popup {
            let popup = self.state_spec().popup.as_ref().expect("open popup has a spec");
            if popup.fragment.find(target).is_none() {
                return;
            }
        }
        self.focused = Some(target);
        self.typed_values.insert(target, text.to_string());
        let chain = ancestor_chain(truth.root(), target).unwrap_or_default();
        self.fire(&chain, ActionKind::Type);
    }

    fn press_enter(&mut self) {
        if let Some(f) = self.focused {
            let truth = self.true_tree();
            let chain = ancestor_chain(truth.root(), f).unwrap_or_default();
            self.fire(&chain, ActionKind::PressEnter);
        }
    }

    fn apply(&mut self, action: &ActionSpec) {
        match action.kind {
            ActionKind::Click => {
                if let Some(p) = action.point {
                    self.click(p);
                }
            }
            ActionKind::Move => {}
            ActionKind::Type => {
                if let (Some(t), Some(text)) = (action.target_id, action.text.as_deref()) {
                    self.type_into(t, text);
                }
            }
            ActionKind::PressEnter => self.press_enter(),
        }
    }
}

/// Ids from the fragment root down to the located element.
fn hit_chain(root: &UiElement, window: crate::ax::BBox, p: Point) -> Option<Vec<u32>> {
    let tree = AxTree::new(root.clone(), window).ok()?;
    let hit = tree.locate(p)?;
    if !root.bbox.contains(p) && hit.id == root.id {
        return None;
    }
    ancestor_chain(root, hit.id)
}

fn ancestor_chain(root: &UiElement, id: u32) -> Option<Vec<u32>> {
    if root.id == id {
        return Some(vec![id]);
    }
    for c in &root.children {
        if let Some(mut chain) = ancestor_chain(c, id) {
            chain.insert(0, root.id);
            return Some(chain);
        }
    }
    None
}

impl Session for SimSession {
    fn observe(&mut self) -> Result<ScreenState, BackendError> {
        if self.closed {
            return Err(BackendError::DeadSession);
        }
        Ok(self.observe_state())
    }

    fn perform(&mut self, action: &ActionSpec) -> Result<StepOutcome, BackendError> {
        if self.closed {
            return Err(BackendError::DeadSession);
        }
        let before = canonical_hash(&self.observe_state().tree, HashMode::Strict);
        self.step_counter += 1;
        self.apply(action);
        let observation = self.observe_state();
        let state_changed = canonical_hash(&observation.tree, HashMode::Strict) != before;
        Ok(StepOutcome { state_changed, observation })
    }

    fn close(&mut self) {
        self.closed = true;
    }
}

/// Session factory over one immutable spec.
#[derive(Debug, Clone)]
pub struct SimBackend {
    spec: Arc<AppSpec>,
}

impl SimBackend {
    pub fn new(spec: AppSpec) -> Self {
        Self { spec: Arc::new(spec) }
    }

    pub fn spec(&self) -> &AppSpec {
        &self.spec
    }

    pub fn session(&self) -> SimSession {
        start_session(self.spec.clone())
    }

    /// Replays `path` on a concrete simulator session (ground-truth access).
    pub fn replay_sim(&self, path: &[ActionSpec]) -> SimSession {
        let mut s = self.session();
        for a in path {
            s.step_counter += 1;
            s.apply(a);
        }
        s
    }
}

impl SessionFactory for SimBackend {
    fn start(&self) -> Result<Box<dyn Session>, BackendError> {
        Ok(Box::new(self.session()))
    }

    fn app_name(&self) -> String {
        self.spec.app_name.clone()
    }

    fn genre(&self) -> String {
        self.spec.genre.clone()
    }
}
