//! Declarative application specs (`*.app.json`).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ax::{ActionKind, AxTree, UiElement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppSpec {
    pub app_name: String,
    pub genre: String,
    pub initial_state: String,
    pub states: BTreeMap<String, StateSpec>,
    pub transitions: Vec<TransitionSpec>,
    pub quirks: QuirkConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub tree: AxTree,
    #[serde(default = "unit_scale")]
    pub scaling_factor: f64,
    #[serde(default)]
    pub popup: Option<PopupSpec>,
    #[serde(default)]
    pub menus: Vec<MenuSpec>,
}

fn unit_scale() -> f64 {
    1.0
}

/// Modal fragment shown when the state is entered: on first entry only, or
/// on every entry when `repeat` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopupSpec {
    pub fragment: UiElement,
    pub dismiss_id: u32,
    #[serde(default)]
    pub repeat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuSpec {
    pub anchor_id: u32,
    pub fragment: UiElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextPredicate {
    NonEmpty,
    Equals(String),
}

impl TextPredicate {
    pub fn accepts(&self, text: &str) -> bool {
        match self {
            TextPredicate::NonEmpty => !text.is_empty(),
            TextPredicate::Equals(s) => s == text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trigger {
    pub element_id: u32,
    pub kind: ActionKind,
    #[serde(default)]
    pub requires_text: Option<TextPredicate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub from_state: String,
    pub trigger: Trigger,
    pub to_state: String,
}

/// Accessibility defects layered over the true tree at observation time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuirkConfig {
    /// Per state, ids of elements (from other states) that linger in the
    /// observed tree with a voided, zero-size bbox.
    #[serde(default)]
    pub stale_element_ids: BTreeMap<String, BTreeSet<u32>>,
    #[serde(default)]
    pub wrong_role_map: BTreeMap<u32, String>,
    /// Displacement `[dx, dy]` applied to the observed bbox of the subtree.
    #[serde(default)]
    pub offscreen_shift: BTreeMap<u32, [f64; 2]>,
    #[serde(default)]
    pub empty_metadata_ids: BTreeSet<u32>,
    #[serde(default)]
    pub seed: u64,
}

impl QuirkConfig {
    pub fn is_empty(&self) -> bool {
        self.stale_element_ids.values().all(|s| s.is_empty())
            && self.wrong_role_map.is_empty()
            && self.offscreen_shift.is_empty()
            && self.empty_metadata_ids.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("invalid app spec: {0}")]
    Invalid(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl AppSpec {
    pub fn state(&self, id: &str) -> Option<&StateSpec> {
        self.states.get(id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization is infallible")
    }

    /// Searches every state (in id order) for an element, including fragments.
    pub fn find_element_anywhere(&self, id: u32) -> Option<&UiElement> {
        self.states.values().find_map(|s| s.find(id))
    }
}

impl StateSpec {
    /// All ids addressable in this state: base tree, popup and menu fragments.
    pub fn all_ids(&self) -> HashSet<u32> {
        let mut ids: HashSet<u32> = self.tree.root().iter().map(|e| e.id).collect();
        if let Some(p) = &self.popup {
            ids.extend(p.fragment.iter().map(|e| e.id));
        }
        for m in &self.menus {
            ids.extend(m.fragment.iter().map(|e| e.id));
        }
        ids
    }

    pub fn find(&self, id: u32) -> Option<&UiElement> {
        self.tree
            .find(id)
            .or_else(|| self.popup.as_ref().and_then(|p| p.fragment.find(id)))
            .or_else(|| self.menus.iter().find_map(|m| m.fragment.find(id)))
    }

    pub fn menu_for(&self, anchor: u32) -> Option<&MenuSpec> {
        self.menus.iter().find(|m| m.anchor_id == anchor)
    }
}

/// Parses and validates an app spec. Unknown fields are rejected and schema
/// errors carry the JSON path of the offending field.
pub fn load_app_spec(bytes: &[u8]) -> Result<AppSpec, SpecError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let spec: AppSpec = serde_path_to_error::deserialize(de).map_err(|e| SpecError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    validate(&spec)?;
    Ok(spec)
}

pub fn load_app_spec_file(path: &Path) -> Result<AppSpec, SpecError> {
    let bytes = std::fs::read(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    load_app_spec(&bytes)
}

fn validate(spec: &AppSpec) -> Result<(), SpecError> {
    let missing_state = |s: &str| SpecError::DanglingReference(s.to_string());
    if !spec.states.contains_key(&spec.initial_state) {
        return Err(missing_state(&spec.initial_state));
    }
    for (sid, state) in &spec.states {
        if !(state.scaling_factor.is_finite() && state.scaling_factor > 0.0) {
            return Err(SpecError::Invalid(format!("state {sid}: scaling_factor must be positive")));
        }
        let base: HashSet<u32> = state.tree.root().iter().map(|e| e.id).collect();
        let mut fragment_ids: HashSet<u32> = HashSet::new();
        let mut check_fragment = |what: &str, frag: &UiElement| -> Result<(), SpecError> {
            for e in frag.iter() {
                if base.contains(&e.id) || !fragment_ids.insert(e.id) {
                    return Err(SpecError::Invalid(format!("state {sid}: {what} id {} collides with another element", e.id)));
                }
            }
            Ok(())
        };
        if let Some(p) = &state.popup {
            check_fragment("popup", &p.fragment)?;
            if p.fragment.find(p.dismiss_id).is_none() {
                return Err(SpecError::DanglingReference(format!("state {sid}: popup dismiss element {}", p.dismiss_id)));
            }
        }
        for m in &state.menus {
            check_fragment("menu", &m.fragment)?;
        }
        let all = state.all_ids();
        for m in &state.menus {
            if !all.contains(&m.anchor_id) || m.fragment.find(m.anchor_id).is_some() {
                return Err(SpecError::DanglingReference(format!("state {sid}: menu anchor {}", m.anchor_id)));
            }
        }
        if state.menus.iter().map(|m| m.anchor_id).collect::<HashSet<_>>().len() != state.menus.len() {
            return Err(SpecError::Invalid(format!("state {sid}: two menus share an anchor")));
        }
    }
    let mut seen = HashSet::new();
    for t in &spec.transitions {
        let from = spec.states.get(&t.from_state).ok_or_else(|| missing_state(&t.from_state))?;
        if !spec.states.contains_key(&t.to_state) {
            return Err(missing_state(&t.to_state));
        }
        if t.trigger.kind == ActionKind::Move {
            return Err(SpecError::Invalid(format!("transition {} -> {}: move cannot trigger", t.from_state, t.to_state)));
        }
        if !from.all_ids().contains(&t.trigger.element_id) {
            return Err(SpecError::DanglingReference(format!(
                "element {} in state {}",
                t.trigger.element_id, t.from_state
            )));
        }
        if !seen.insert((t.from_state.clone(), t.trigger.clone())) {
            return Err(SpecError::Invalid(format!(
                "duplicate transition from {} on element {}",
                t.from_state, t.trigger.element_id
            )));
        }
    }
    for (sid, ids) in &spec.quirks.stale_element_ids {
        if !spec.states.contains_key(sid) {
            return Err(missing_state(sid));
        }
        for id in ids {
            if spec.find_element_anywhere(*id).is_none() {
                return Err(SpecError::DanglingReference(format!("stale element {id}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "app_name": "Mini", "genre": "Utilities", "initial_state": "s0",
        "states": {"s0": {"tree": {"window_bbox": [0,0,100,100],
            "root": {"id": 0, "role": "AXWindow", "bbox": [0,0,100,100]}}}},
        "transitions": [], "quirks": {}
    }"#;

    #[test]
    fn minimal_spec_loads() {
        let spec = load_app_spec(MINIMAL.as_bytes()).unwrap();
        assert_eq!(spec.states.len(), 1);
        assert_eq!(spec.state("s0").unwrap().scaling_factor, 1.0);
    }

    #[test]
    fn dangling_state_reported() {
        let v = MINIMAL.replace(
            r#""transitions": []"#,
            r#""transitions": [{"from_state": "s0", "trigger": {"element_id": 0, "kind": "click"}, "to_state": "s9"}]"#,
        );
        match load_app_spec(v.as_bytes()) {
            Err(SpecError::DanglingReference(s)) => assert_eq!(s, "s9"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_reports_path() {
        let v = MINIMAL.replace(r#""role": "AXWindow""#, r#""role": "AXWindow", "colour": 3"#);
        match load_app_spec(v.as_bytes()) {
            Err(SpecError::Schema { path, .. }) => assert_eq!(path, "states.s0.tree.root.colour"),
            other => panic!("{other:?}"),
        }
        let v = MINIMAL.replace(r#""quirks": {}"#, r#""quirks": {}, "extra": 1"#);
        assert!(matches!(load_app_spec(v.as_bytes()), Err(SpecError::Schema { .. })));
    }

    #[test]
    fn trigger_on_missing_element() {
        let v = MINIMAL.replace(
            r#""transitions": []"#,
            r#""transitions": [{"from_state": "s0", "trigger": {"element_id": 44, "kind": "click"}, "to_state": "s0"}]"#,
        );
        assert!(matches!(load_app_spec(v.as_bytes()), Err(SpecError::DanglingReference(_))));
    }

    #[test]
    fn duplicate_transition_rejected() {
        let t = r#"{"from_state": "s0", "trigger": {"element_id": 0, "kind": "click"}, "to_state": "s0"}"#;
        let v = MINIMAL.replace(r#""transitions": []"#, &format!(r#""transitions": [{t}, {t}]"#));
        assert!(matches!(load_app_spec(v.as_bytes()), Err(SpecError::Invalid(_))));
    }

    #[test]
    fn predicates() {
        assert!(TextPredicate::NonEmpty.accepts("x"));
        assert!(!TextPredicate::NonEmpty.accepts(""));
        assert!(TextPredicate::Equals("a".into()).accepts("a"));
        let p: TextPredicate = serde_json::from_str(r#"{"equals": "Go"}"#).unwrap();
        assert_eq!(p, TextPredicate::Equals("Go".into()));
        let p: TextPredicate = serde_json::from_str(r#""non_empty""#).unwrap();
        assert_eq!(p, TextPredicate::NonEmpty);
    }
}
