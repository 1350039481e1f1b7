//! Accessibility data model: geometry, element trees, canonical hashing and
//! structural diffing. Everything here is an immutable value once built.

mod diff;
mod geometry;
mod hash;
mod tree;

pub use diff::{diff, signatures, ElementSignature, TreeDiff};
pub use geometry::{BBox, InvalidBBox, Point};
pub use hash::{canonical_bytes, canonical_hash, HashMode, LAYOUT_GRID};
pub use tree::{
    is_visible, ActionKind, ActionSpec, AxTree, MalformedAction, Preorder, ScreenState, TreeError, UiElement,
};
