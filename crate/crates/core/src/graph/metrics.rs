use std::collections::{BTreeMap, VecDeque};

use super::InteractionGraph;
use crate::crawler::CrawlReport;

/// Shortest-path edge count from the root for every reachable node.
pub fn node_depths(g: &InteractionGraph) -> BTreeMap<u32, usize> {
    let mut depth = BTreeMap::from([(g.root, 0usize)]);
    let mut q = VecDeque::from([g.root]);
    while let Some(n) = q.pop_front() {
        let d = depth[&n];
        for e in g.outgoing(n) {
            depth.entry(e.out_vertex).or_insert_with(|| {
                q.push_back(e.out_vertex);
                d + 1
            });
        }
    }
    depth
}

/// Graph radius from the root.
pub fn depth(g: &InteractionGraph) -> usize {
    node_depths(g).into_values().max().unwrap_or(0)
}

/// Linked duplicates over all discovered states (new + duplicate).
pub fn duplicate_ratio(duplicates_linked: u64, nodes_created: u64) -> f64 {
    let total = duplicates_linked + nodes_created;
    if total == 0 {
        0.0
    } else {
        duplicates_linked as f64 / total as f64
    }
}

pub fn duplicate_rate(g: &InteractionGraph, report: &CrawlReport) -> f64 {
    debug_assert_eq!(report.nodes_created as usize, g.nodes.len());
    duplicate_ratio(report.duplicates_linked, report.nodes_created)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ax::{ActionSpec, Point};
    use crate::graph::tests::state;

    fn a() -> ActionSpec {
        ActionSpec::click(None, Point::new(0.0, 0.0))
    }

    #[test]
    fn single_node_and_chain() {
        let mut g = InteractionGraph::new("x", "g", state("r"));
        assert_eq!(depth(&g), 0);
        let n1 = g.add_child(0, a(), "a".into(), vec![], state("a"));
        g.add_child(n1, a(), "b".into(), vec![], state("b"));
        assert_eq!(depth(&g), 2);
    }

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(duplicate_ratio(0, 10), 0.0);
        assert!((duplicate_ratio(1, 9) - 0.1).abs() < 1e-12);
        assert_eq!(duplicate_ratio(0, 0), 0.0);
    }
}
