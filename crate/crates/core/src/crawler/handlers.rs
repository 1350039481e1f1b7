//! The four exploration handlers: pop-ups, invisible elements, menus and
//! elements with empty metadata.

use std::collections::BTreeSet;

use crate::ax::{canonical_hash, diff, is_visible, ActionSpec, HashMode, Point, ScreenState, TreeDiff, UiElement};
use crate::backend::{BackendError, SessionFactory};

pub const POPUP_ROLES: &[&str] = &["AXSheet", "AXDialog", "AXPopover"];
pub const MENU_ANCHOR_ROLES: &[&str] = &["AXMenuButton", "AXPopUpButton", "AXMenuBarItem"];
const DISMISS_WORDS: &[&str] = &["close", "cancel", "ok", "dismiss", "not now", "continue", "done", "later", "skip"];

/// Actions for an open modal: everything inside it, dismiss last.
#[derive(Debug, Clone, PartialEq)]
pub struct PopupPlan {
    pub root_id: u32,
    pub internal: Vec<UiElement>,
    pub dismiss: UiElement,
}

impl PopupPlan {
    pub fn ordered(&self) -> Vec<&UiElement> {
        self.internal.iter().chain(std::iter::once(&self.dismiss)).collect()
    }
}

fn is_dismiss_label(el: &UiElement) -> bool {
    el.label().is_some_and(|l| {
        let l = l.trim().to_lowercase();
        DISMISS_WORDS.iter().any(|w| l == *w || l.starts_with(&format!("{w} ")))
    })
}

/// Finds the last modal subtree in document order and plans its actions.
pub fn handle_popup(state: &ScreenState) -> Option<PopupPlan> {
    let root = state.tree.flatten().into_iter().rfind(|e| POPUP_ROLES.contains(&e.role.as_str()))?;
    let leaves: Vec<&UiElement> = root.iter().skip(1).filter(|e| e.is_leaf() && e.enabled).collect();
    let buttons = || leaves.iter().filter(|e| e.role.contains("Button"));
    let dismiss = leaves
        .iter()
        .find(|e| is_dismiss_label(e))
        .or_else(|| buttons().next_back())
        .or_else(|| leaves.last())?;
    let dismiss = (*dismiss).clone();
    let internal = leaves.into_iter().filter(|e| e.id != dismiss.id).cloned().collect();
    Some(PopupPlan { root_id: root.id, internal, dismiss })
}

/// Visible, enabled, non-root elements in document order.
pub fn filter_invisible(state: &ScreenState) -> Vec<UiElement> {
    let w = state.tree.window_bbox();
    let root = state.tree.root().id;
    state
        .tree
        .flatten()
        .into_iter()
        .filter(|e| e.id != root && e.enabled && is_visible(e, &w))
        .map(UiElement::shallow)
        .collect()
}

/// Names anonymous elements `<role>@<x>,<y>` and drops placeholders that
/// have no area or neither a role nor children. Returns the kept elements
/// and how many were renamed or dropped.
pub fn resolve_empty_elements(elements: Vec<UiElement>) -> (Vec<UiElement>, u64) {
    let mut touched = 0;
    let mut out = Vec::with_capacity(elements.len());
    for mut e in elements {
        if e.label().is_some() {
            out.push(e);
            continue;
        }
        touched += 1;
        let has_area = e.bbox.w > 0.0 && e.bbox.h > 0.0;
        if !has_area || (e.role.is_empty() && e.children.is_empty()) {
            continue;
        }
        e.name = Some(crate::agents::synthesized_name(&e));
        out.push(e);
    }
    (out, touched)
}

pub fn is_menu_anchor(el: &UiElement) -> bool {
    MENU_ANCHOR_ROLES.contains(&el.role.as_str())
}

/// A diff that only adds elements: a menu or submenu opened.
pub fn is_expansion(d: &TreeDiff) -> bool {
    d.removed.is_empty() && !d.added.is_empty()
}

/// Outcome of clicking one menu anchor.
#[derive(Debug, Clone)]
pub struct MenuProbe {
    pub anchor: UiElement,
    pub steps: Vec<ActionSpec>,
    pub before: ScreenState,
    pub after: ScreenState,
    pub diff: TreeDiff,
    /// `Some(false)` when clicking outside did not bring back the pre-call
    /// state; `None` when nothing expanded and no restore was needed.
    pub restored: Option<bool>,
}

impl MenuProbe {
    pub fn expanded(&self) -> bool {
        is_expansion(&self.diff)
    }
}

pub fn click_steps(el: &UiElement, cursor_move: bool) -> Vec<ActionSpec> {
    let c = el.bbox.center();
    let mut steps = Vec::with_capacity(2);
    if cursor_move {
        steps.push(ActionSpec::move_to(Some(el.id), c));
    }
    steps.push(ActionSpec::click(Some(el.id), c));
    steps
}

/// A point inside the window but outside every element in `avoid`.
fn outside_point(state: &ScreenState, avoid: &[&UiElement]) -> Point {
    let w = state.tree.window_bbox();
    let corners = [
        Point::new(w.x + 1.0, w.y + 1.0),
        Point::new(w.right() - 1.0, w.y + 1.0),
        Point::new(w.x + 1.0, w.bottom() - 1.0),
        Point::new(w.right() - 1.0, w.bottom() - 1.0),
    ];
    corners.into_iter().find(|p| avoid.iter().all(|e| !e.bbox.contains(*p))).unwrap_or(corners[0])
}

/// Clicks each anchor on a fresh replay of `entry_path`, observes the
/// result and, when a menu expanded, clicks outside it and checks that the
/// pre-call state is back.
pub fn unroll_menus(
    factory: &dyn SessionFactory,
    entry_path: &[ActionSpec],
    anchors: &[UiElement],
    cursor_move: bool,
) -> Result<Vec<MenuProbe>, BackendError> {
    let mut out = Vec::with_capacity(anchors.len());
    for anchor in anchors {
        let mut s = factory.replay(entry_path)?;
        let before = s.observe()?;
        let steps = click_steps(anchor, cursor_move);
        let mut after = before.clone();
        for a in &steps {
            after = s.perform(a)?.observation;
        }
        let d = diff(&before.tree, &after.tree);
        let restored = if is_expansion(&d) {
            let known: BTreeSet<u32> = before.tree.flatten().iter().map(|e| e.id).collect();
            let avoid: Vec<&UiElement> = after.tree.flatten().into_iter().filter(|e| !known.contains(&e.id)).collect();
            let p = outside_point(&after, &avoid);
            let back = s.perform(&ActionSpec::click(None, p))?.observation;
            Some(canonical_hash(&back.tree, HashMode::Strict) == canonical_hash(&before.tree, HashMode::Strict))
        } else {
            None
        };
        s.close();
        out.push(MenuProbe { anchor: anchor.clone(), steps, before, after, diff: d, restored });
    }
    Ok(out)
}
