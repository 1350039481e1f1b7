use std::collections::BTreeMap;
use std::fmt::Write;

use super::metrics::node_depths;
use super::InteractionGraph;

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn export_dot(g: &InteractionGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", dot_escape(&g.app_name)).unwrap();
    writeln!(out, "  node [shape=box];").unwrap();
    for id in g.nodes.keys() {
        writeln!(out, "  n{id} [label=\"{} #{id}\"];", dot_escape(&g.app_name)).unwrap();
    }
    for e in &g.edges {
        writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from_node, e.out_vertex, dot_escape(&e.action_description)).unwrap();
    }
    out.push_str("}\n");
    out
}

const NODE_W: i64 = 160;
const NODE_H: i64 = 40;
const H_GAP: i64 = 40;
const LAYER_GAP: i64 = 110;
const MARGIN: i64 = 20;

/// Layered SVG: one horizontal layer per BFS depth, nodes ordered by id
/// within a layer and centered.
pub fn export_svg(g: &InteractionGraph) -> String {
    let depths = node_depths(g);
    let mut layers: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (id, d) in &depths {
        layers.entry(*d).or_default().push(*id);
    }
    let widest = layers.values().map(Vec::len).max().unwrap_or(1) as i64;
    let width = 2 * MARGIN + widest * NODE_W + (widest - 1) * H_GAP;
    let height = 2 * MARGIN + layers.len() as i64 * NODE_H + (layers.len() as i64 - 1).max(0) * (LAYER_GAP - NODE_H);

    let mut pos: BTreeMap<u32, (i64, i64)> = BTreeMap::new();
    for (d, ids) in &layers {
        let row_w = ids.len() as i64 * NODE_W + (ids.len() as i64 - 1) * H_GAP;
        let x0 = (width - row_w) / 2;
        for (i, id) in ids.iter().enumerate() {
            pos.insert(*id, (x0 + i as i64 * (NODE_W + H_GAP), MARGIN + *d as i64 * LAYER_GAP));
        }
    }

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", xml_escape(&g.app_name)).unwrap();
    out.push_str(r##"<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="8" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#555"/></marker></defs>"##);
    out.push('\n');
    for e in &g.edges {
        let (Some(&(fx, fy)), Some(&(tx, ty))) = (pos.get(&e.from_node), pos.get(&e.out_vertex)) else {
            continue;
        };
        let (x1, y1) = (fx + NODE_W / 2, fy + NODE_H);
        let (x2, y2) = (tx + NODE_W / 2, ty);
        let path = if y2 > y1 {
            format!("M{x1},{y1} L{x2},{y2}")
        } else {
            // back or sideways edge: bow out to the right
            let cx = x1.max(x2) + NODE_W;
            format!("M{x1},{y1} C{cx},{} {cx},{} {x2},{y2}", y1 + LAYER_GAP / 2, y2 - LAYER_GAP / 2)
        };
        writeln!(
            out,
            r##"<path class="edge" d="{path}" fill="none" stroke="#555" marker-end="url(#arrow)"><title>{}</title></path>"##,
            xml_escape(&e.action_description)
        )
        .unwrap();
    }
    for (id, (x, y)) in &pos {
        writeln!(
            out,
            r##"<g class="node" id="n{id}"><rect x="{x}" y="{y}" width="{NODE_W}" height="{NODE_H}" rx="6" fill="#eef2f8" stroke="#333"/><text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="middle">{} #{id}</text></g>"##,
            x + NODE_W / 2,
            y + NODE_H / 2 + 4,
            xml_escape(&g.app_name)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::state;

    #[test]
    fn single_node_dot() {
        let g = InteractionGraph::new("Calc", "Utilities", state("r"));
        let dot = export_dot(&g);
        assert_eq!(dot.matches("[label=").count(), 1);
        assert!(dot.contains("n0 [label=\"Calc #0\"]"));
    }

    #[test]
    fn escapes_labels() {
        let g = InteractionGraph::new("A \"quoted\" <app>", "x", state("r"));
        assert!(export_dot(&g).contains("A \\\"quoted\\\" <app>"));
        assert!(export_svg(&g).contains("A &quot;quoted&quot; &lt;app&gt;"));
    }
}
