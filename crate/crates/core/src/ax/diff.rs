use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::tree::{AxTree, UiElement};

/// Id-free identity of an element: its structural path from the root plus
/// its own role/name/description, disambiguated by an ordinal among
/// identical siblings. Values are deliberately excluded so that an edited
/// field keeps its signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementSignature(pub String);

impl std::fmt::Display for ElementSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDiff {
    pub added: BTreeSet<ElementSignature>,
    pub removed: BTreeSet<ElementSignature>,
    pub changed: BTreeSet<ElementSignature>,
}

impl TreeDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.changed.is_empty()
    }

    /// Elements added plus removed; `changed` never counts.
    pub fn structural_delta(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

fn quoted(s: Option<&str>) -> String {
    // JSON quoting keeps the encoding unambiguous for any text content.
    s.map(|s| serde_json::to_string(s).expect("string encodes")).unwrap_or_else(|| "~".into())
}

fn segment(e: &UiElement) -> String {
    format!("{}{}", e.role, quoted(e.name.as_deref()))
}

/// Map of signature -> value for every element of the tree.
pub fn signatures(tree: &AxTree) -> BTreeMap<ElementSignature, Option<String>> {
    let mut out = BTreeMap::new();
    let root = tree.root();
    let root_sig = format!("{}({})#0", segment(root), quoted(root.description.as_deref()));
    out.insert(ElementSignature(root_sig), root.value.clone());
    let mut stack = vec![(segment(root), root)];
    while let Some((path, e)) = stack.pop() {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut next = Vec::with_capacity(e.children.len());
        for c in &e.children {
            let own = format!("{}({})", segment(c), quoted(c.description.as_deref()));
            let n = seen.entry(own.clone()).or_insert(0);
            let sig = format!("{path}/{own}#{n}");
            *n += 1;
            out.insert(ElementSignature(sig), c.value.clone());
            next.push((format!("{path}/{}", segment(c)), c));
        }
        stack.extend(next.into_iter().rev());
    }
    out
}

pub fn diff(before: &AxTree, after: &AxTree) -> TreeDiff {
    let b = signatures(before);
    let a = signatures(after);
    let mut d = TreeDiff::default();
    for (sig, value) in &a {
        match b.get(sig) {
            None => {
                d.added.insert(sig.clone());
            }
            Some(old) if old != value => {
                d.changed.insert(sig.clone());
            }
            Some(_) => {}
        }
    }
    for sig in b.keys() {
        if !a.contains_key(sig) {
            d.removed.insert(sig.clone());
        }
    }
    d
}
