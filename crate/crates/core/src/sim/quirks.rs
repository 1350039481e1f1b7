use crate::ax::{AxTree, BBox, UiElement};

use super::spec::AppSpec;

/// Ids of stale copies are offset so they never collide with live elements.
pub const STALE_ID_BASE: u32 = 1_000_000;

/// Layers the spec's accessibility defects over a true tree. Pure in
/// `(spec, state, truth)`; `trailing_fragments` is the number of popup/menu
/// fragments appended at the end of the root so stale copies can be placed
/// before them.
pub fn apply_quirks(spec: &AppSpec, state: &str, truth: AxTree, trailing_fragments: usize) -> AxTree {
    let q = &spec.quirks;
    if q.is_empty() {
        return truth;
    }
    let window = truth.window_bbox();
    let mut root = truth.into_root();

    if let Some(ids) = q.stale_element_ids.get(state) {
        let at = root.children.len().saturating_sub(trailing_fragments);
        let stale: Vec<UiElement> = ids
            .iter()
            .filter_map(|id| {
                let src = spec
                    .states
                    .iter()
                    .filter(|(sid, _)| sid.as_str() != state)
                    .find_map(|(_, s)| s.find(*id))
                    .or_else(|| spec.find_element_anywhere(*id))?;
                let mut copy = src.shallow();
                copy.id = STALE_ID_BASE + src.id;
                copy.bbox = BBox { w: 0.0, h: 0.0, ..src.bbox };
                Some(copy)
            })
            .collect();
        root.children.splice(at..at, stale);
    }

    root.for_each_mut(&mut |e| {
        if e.id >= STALE_ID_BASE {
            return;
        }
        if let Some(role) = q.wrong_role_map.get(&e.id) {
            e.role = role.clone();
        }
        if q.empty_metadata_ids.contains(&e.id) {
            e.name = None;
            e.description = None;
        }
    });
    for (id, [dx, dy]) in &q.offscreen_shift {
        if let Some(e) = root.find_mut(*id) {
            e.for_each_mut(&mut |n| n.bbox = n.bbox.translated(*dx, *dy));
        }
    }
    AxTree::new(root, window).expect("quirks preserve id uniqueness")
}
