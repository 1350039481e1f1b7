//! Canonical tree digests.
//!
//! The digest is the first eight bytes (big-endian) of SHA-256 over a
//! canonical byte serialization of the tree:
//!
//! ```text
//! "axh1" mode:u8 [window:grid4]
//! node := role:str name:opt description:opt value:opt [bbox:grid4] nchildren:u64 node*
//! str  := len:u64le bytes
//! opt  := 0x00 | 0x01 str
//! grid4 := 4 x i64le, each floor(coord / 4)
//! ```
//!
//! `[..]` parts are only present in [`HashMode::Strict`]. Element ids and the
//! `enabled` flag never contribute.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::geometry::BBox;
use super::tree::{AxTree, UiElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HashMode {
    Strict,
    LayoutInsensitive,
}

pub const LAYOUT_GRID: f64 = 4.0;

/// Canonical bytes fed to the digest; exposed for tests and tooling.
pub fn canonical_bytes(tree: &AxTree, mode: HashMode) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 * tree.element_count());
    out.extend_from_slice(b"axh1");
    out.push(match mode {
        HashMode::Strict => 1,
        HashMode::LayoutInsensitive => 2,
    });
    if mode == HashMode::Strict {
        put_grid(&mut out, &tree.window_bbox());
    }
    let mut stack: Vec<&UiElement> = vec![tree.root()];
    while let Some(e) = stack.pop() {
        put_str(&mut out, &e.role);
        put_opt(&mut out, e.name.as_deref());
        put_opt(&mut out, e.description.as_deref());
        put_opt(&mut out, e.value.as_deref());
        if mode == HashMode::Strict {
            put_grid(&mut out, &e.bbox);
        }
        out.extend_from_slice(&(e.children.len() as u64).to_le_bytes());
        stack.extend(e.children.iter().rev());
    }
    out
}

pub fn canonical_hash(tree: &AxTree, mode: HashMode) -> u64 {
    let digest = Sha256::digest(canonical_bytes(tree, mode));
    u64::from_be_bytes(digest[..8].try_into().expect("sha256 is 32 bytes"))
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u64).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_opt(out: &mut Vec<u8>, s: Option<&str>) {
    match s {
        None => out.push(0),
        Some(s) => {
            out.push(1);
            put_str(out, s);
        }
    }
}

fn put_grid(out: &mut Vec<u8>, b: &BBox) {
    for v in [b.x, b.y, b.w, b.h] {
        out.extend_from_slice(&((v / LAYOUT_GRID).floor() as i64).to_le_bytes());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ax::geometry::BBox;

    fn tree() -> AxTree {
        let kids = vec![
            UiElement::new(1, "AXButton", BBox::of(8.0, 8.0, 40.0, 20.0)).named("Open"),
            UiElement::new(2, "AXTextField", BBox::of(8.0, 40.0, 120.0, 20.0)).with_value("abc"),
        ];
        let root = UiElement::new(0, "AXWindow", BBox::of(0.0, 0.0, 200.0, 100.0)).named("Main").with_children(kids);
        AxTree::new(root, BBox::of(0.0, 0.0, 200.0, 100.0)).unwrap()
    }

    #[test]
    fn modes_differ_and_ids_do_not_matter() {
        let t = tree();
        assert_ne!(canonical_hash(&t, HashMode::Strict), canonical_hash(&t, HashMode::LayoutInsensitive));
        let mut root = t.root().clone();
        let mut next = 100;
        root.for_each_mut(&mut |e| {
            e.id = next;
            next += 7;
        });
        let renumbered = AxTree::new(root, t.window_bbox()).unwrap();
        for m in [HashMode::Strict, HashMode::LayoutInsensitive] {
            assert_eq!(canonical_hash(&t, m), canonical_hash(&renumbered, m));
        }
    }

    #[test]
    fn absent_and_empty_name_are_distinct() {
        let a = AxTree::new(UiElement::new(0, "AXWindow", BBox::of(0.0, 0.0, 4.0, 4.0)), BBox::of(0.0, 0.0, 4.0, 4.0)).unwrap();
        let b = AxTree::new(UiElement::new(0, "AXWindow", BBox::of(0.0, 0.0, 4.0, 4.0)).named(""), BBox::of(0.0, 0.0, 4.0, 4.0)).unwrap();
        assert_ne!(canonical_hash(&a, HashMode::LayoutInsensitive), canonical_hash(&b, HashMode::LayoutInsensitive));
    }

    #[test]
    fn layout_insensitive_ignores_geometry() {
        let t = tree();
        let mut root = t.root().clone();
        root.for_each_mut(&mut |e| e.bbox = e.bbox.translated(37.0, 11.0));
        let moved = AxTree::new(root, t.window_bbox()).unwrap();
        assert_eq!(canonical_hash(&t, HashMode::LayoutInsensitive), canonical_hash(&moved, HashMode::LayoutInsensitive));
        assert_ne!(canonical_hash(&t, HashMode::Strict), canonical_hash(&moved, HashMode::Strict));
    }
}
