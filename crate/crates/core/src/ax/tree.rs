use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::geometry::{BBox, Point};

/// One accessibility node.
///
/// Field order is the canonical serialization order and must not change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UiElement {
    pub id: u32,
    pub role: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub value: Option<String>,
    pub bbox: BBox,
    #[serde(default = "default_enabled")]
    pub enabled: bool,
    #[serde(default)]
    pub children: Vec<UiElement>,
}

fn default_enabled() -> bool {
    true
}

impl UiElement {
    pub fn new(id: u32, role: impl Into<String>, bbox: BBox) -> Self {
        Self {
            id,
            role: role.into(),
            name: None,
            description: None,
            value: None,
            bbox,
            enabled: true,
            children: Vec::new(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    pub fn with_value(mut self, value: impl Into<String>) -> Self {
        self.value = Some(value.into());
        self
    }

    pub fn with_children(mut self, children: Vec<UiElement>) -> Self {
        self.children = children;
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Name, falling back to description; empty strings count as missing.
    pub fn label(&self) -> Option<&str> {
        self.name
            .as_deref()
            .filter(|s| !s.is_empty())
            .or_else(|| self.description.as_deref().filter(|s| !s.is_empty()))
    }

    /// Copy of this node without its subtree.
    pub fn shallow(&self) -> UiElement {
        UiElement { children: Vec::new(), ..self.clone() }
    }

    /// Preorder iterator over this subtree.
    pub fn iter(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }

    pub fn find(&self, id: u32) -> Option<&UiElement> {
        self.iter().find(|e| e.id == id)
    }

    pub fn find_mut(&mut self, id: u32) -> Option<&mut UiElement> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }

    /// Applies `f` to every node of the subtree in preorder.
    pub fn for_each_mut(&mut self, f: &mut impl FnMut(&mut UiElement)) {
        f(self);
        for c in &mut self.children {
            c.for_each_mut(f);
        }
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a UiElement>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a UiElement;

    fn next(&mut self) -> Option<Self::Item> {
        let e = self.stack.pop()?;
        self.stack.extend(e.children.iter().rev());
        Some(e)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("duplicate element id {0}")]
    DuplicateId(u32),
    #[error("window bbox must have positive width and height")]
    EmptyWindow,
}

/// An accessibility tree of one application window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTree", into = "RawTree")]
pub struct AxTree {
    window_bbox: BBox,
    root: UiElement,
    element_count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTree {
    window_bbox: BBox,
    root: UiElement,
}

impl TryFrom<RawTree> for AxTree {
    type Error = TreeError;

    fn try_from(raw: RawTree) -> Result<Self, Self::Error> {
        AxTree::new(raw.root, raw.window_bbox)
    }
}

impl From<AxTree> for RawTree {
    fn from(t: AxTree) -> Self {
        RawTree { window_bbox: t.window_bbox, root: t.root }
    }
}

impl AxTree {
    pub fn new(root: UiElement, window_bbox: BBox) -> Result<Self, TreeError> {
        if window_bbox.w <= 0.0 || window_bbox.h <= 0.0 {
            return Err(TreeError::EmptyWindow);
        }
        let mut seen = HashSet::new();
        for e in root.iter() {
            if !seen.insert(e.id) {
                return Err(TreeError::DuplicateId(e.id));
            }
        }
        Ok(Self { window_bbox, element_count: seen.len(), root })
    }

    pub fn root(&self) -> &UiElement {
        &self.root
    }

    pub fn window_bbox(&self) -> BBox {
        self.window_bbox
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn into_root(self) -> UiElement {
        self.root
    }

    pub fn find(&self, id: u32) -> Option<&UiElement> {
        self.root.find(id)
    }

    /// Preorder listing of every node.
    pub fn flatten(&self) -> Vec<&UiElement> {
        self.root.iter().collect()
    }

    /// Deepest element containing `p`; among equally deep candidates the last
    /// one in document order wins (it paints on top).
    pub fn locate(&self, p: Point) -> Option<&UiElement> {
        if !self.window_bbox.contains(p) {
            return None;
        }
        let mut best: Option<(usize, &UiElement)> = None;
        let mut stack = vec![(0usize, &self.root)];
        while let Some((depth, e)) = stack.pop() {
            if e.bbox.contains(p) && best.is_none_or(|(d, _)| depth >= d) {
                best = Some((depth, e));
            }
            stack.extend(e.children.iter().rev().map(|c| (depth + 1, c)));
        }
        best.map(|(_, e)| e)
    }

    /// Element painted on top at `p`: the last one in preorder containing
    /// it, so overlays appended after the content they cover win.
    pub fn topmost(&self, p: Point) -> Option<&UiElement> {
        if !self.window_bbox.contains(p) {
            return None;
        }
        self.root.iter().filter(|e| e.bbox.contains(p)).last()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// True iff the element has positive size and overlaps the window by a
/// positive area.
pub fn is_visible(el: &UiElement, window: &BBox) -> bool {
    el.bbox.w > 0.0 && el.bbox.h > 0.0 && el.bbox.intersection_area(window) > 0.0
}

/// One observed UI state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenState {
    pub tree: AxTree,
    pub image_name: String,
    pub scaling_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Click,
    Move,
    Type,
    PressEnter,
}

/// A single primitive interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub kind: ActionKind,
    #[serde(default)]
    pub target_id: Option<u32>,
    #[serde(default)]
    pub point: Option<Point>,
    #[serde(default)]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("malformed {kind:?} action: {reason}")]
pub struct MalformedAction {
    pub kind: ActionKind,
    pub reason: &'static str,
}

impl ActionSpec {
    pub fn click(target_id: Option<u32>, point: Point) -> Self {
        Self { kind: ActionKind::Click, target_id, point: Some(point), text: None }
    }

    pub fn move_to(target_id: Option<u32>, point: Point) -> Self {
        Self { kind: ActionKind::Move, target_id, point: Some(point), text: None }
    }

    pub fn type_text(target_id: u32, text: impl Into<String>) -> Self {
        Self { kind: ActionKind::Type, target_id: Some(target_id), point: None, text: Some(text.into()) }
    }

    pub fn press_enter() -> Self {
        Self { kind: ActionKind::PressEnter, target_id: None, point: None, text: None }
    }

    pub fn validate(&self) -> Result<(), MalformedAction> {
        let bad = |reason| Err(MalformedAction { kind: self.kind, reason });
        match self.kind {
            ActionKind::Click | ActionKind::Move if self.point.is_none() => bad("missing point"),
            ActionKind::Type if self.text.is_none() => bad("missing text"),
            ActionKind::Type if self.target_id.is_none() => bad("missing target"),
            ActionKind::PressEnter
                if self.point.is_some() || self.text.is_some() || self.target_id.is_some() =>
            {
                bad("press enter carries no payload")
            }
            _ => Ok(()),
        }
    }
}
