//! Proptest generators for trees, graphs and task records.

use proptest::collection::vec;
use proptest::prelude::*;

use axcrawl::ax::{ActionSpec, AxTree, BBox, Point, ScreenState, UiElement};
use axcrawl::graph::{InteractionGraph, SafeAction};
use axcrawl::tasks::{format_action, TaskRecord};

const ROLES: &[&str] = &["AXButton", "AXStaticText", "AXTextField", "AXGroup", "AXCheckBox", "AXMenuItem", "AXImage", "AXLink"];

pub fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![(-50i32..1500).prop_map(f64::from), -50.0f64..1500.0]
}

pub fn extent() -> impl Strategy<Value = f64> {
    prop_oneof![(0i32..400).prop_map(f64::from), 0.0f64..400.0]
}

pub fn bbox() -> impl Strategy<Value = BBox> {
    (coord(), coord(), extent(), extent()).prop_map(|(x, y, w, h)| BBox::of(x, y, w, h))
}

pub fn window() -> impl Strategy<Value = BBox> {
    (0i32..200, 0i32..200, 50i32..1600, 50i32..1000).prop_map(|(x, y, w, h)| BBox::of(x.into(), y.into(), w.into(), h.into()))
}

pub fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 é✓\"\\\\,()]{0,10}"
}

fn opt_text() -> impl Strategy<Value = Option<String>> {
    proptest::option::of(text())
}

fn node() -> impl Strategy<Value = UiElement> {
    (prop::sample::select(ROLES), opt_text(), opt_text(), opt_text(), bbox(), any::<bool>()).prop_map(|(role, name, description, value, bbox, enabled)| {
        let mut e = UiElement::new(0, role, bbox);
        e.name = name;
        e.description = description;
        e.value = value;
        e.enabled = enabled;
        e
    })
}

pub fn element() -> impl Strategy<Value = UiElement> {
    node().prop_recursive(4, 48, 5, |inner| {
        (node(), vec(inner, 0..5)).prop_map(|(mut e, children)| {
            e.children = children;
            e
        })
    })
}

/// Assigns ids `start, start + stride, ...` in preorder.
pub fn number(e: &mut UiElement, next: &mut u32, stride: u32) {
    e.id = *next;
    *next += stride;
    for c in &mut e.children {
        number(c, next, stride);
    }
}

pub fn tree() -> impl Strategy<Value = AxTree> {
    (element(), window()).prop_map(|(mut root, w)| {
        number(&mut root, &mut 0, 1);
        AxTree::new(root, w).unwrap()
    })
}

pub fn state() -> impl Strategy<Value = ScreenState> {
    (tree(), prop::sample::select(vec![1.0, 1.5, 2.0]), 0u32..1000)
        .prop_map(|(tree, scaling_factor, n)| ScreenState { tree, image_name: format!("screen_{n:06}.ppm"), scaling_factor })
}

fn point() -> impl Strategy<Value = Point> {
    (coord(), coord()).prop_map(|(x, y)| Point::new(x, y))
}

pub fn action() -> impl Strategy<Value = ActionSpec> {
    prop_oneof![
        (proptest::option::of(0u32..500), point()).prop_map(|(t, p)| ActionSpec::click(t, p)),
        (proptest::option::of(0u32..500), point()).prop_map(|(t, p)| ActionSpec::move_to(t, p)),
        (0u32..500, text()).prop_map(|(t, s)| ActionSpec::type_text(t, s)),
        Just(ActionSpec::press_enter()),
    ]
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum GraphOp {
    Child(usize, ActionSpec, String, Vec<ActionSpec>, ScreenState),
    Link(usize, usize, ActionSpec, String, Vec<ActionSpec>),
    Safe(usize, ActionSpec, Vec<ActionSpec>, String, bool),
}

fn graph_op() -> impl Strategy<Value = GraphOp> {
    prop_oneof![
        (any::<usize>(), action(), text(), vec(action(), 0..3), state()).prop_map(|(f, a, d, s, st)| GraphOp::Child(f, a, d, s, st)),
        (any::<usize>(), any::<usize>(), action(), text(), vec(action(), 0..3)).prop_map(|(f, t, a, d, s)| GraphOp::Link(f, t, a, d, s)),
        (any::<usize>(), action(), vec(action(), 0..3), text(), any::<bool>()).prop_map(|(f, a, s, d, o)| GraphOp::Safe(f, a, s, d, o)),
    ]
}

pub fn build_graph(app: &str, genre: &str, root: ScreenState, ops: Vec<GraphOp>) -> InteractionGraph {
    let mut g = InteractionGraph::new(app, genre, root);
    for op in ops {
        let ids: Vec<u32> = g.nodes.keys().copied().collect();
        let pick = |i: usize| ids[i % ids.len()];
        match op {
            GraphOp::Child(f, a, d, s, st) => {
                g.add_child(pick(f), a, d, s, st);
            }
            GraphOp::Link(f, t, a, d, s) => g.link(pick(f), pick(t), a, d, s),
            GraphOp::Safe(f, action, steps, action_description, observable_change) => g
                .node_mut(pick(f))
                .unwrap()
                .safe_actions
                .push(SafeAction { action, steps, action_description, observable_change }),
        }
    }
    g
}

pub fn graph() -> impl Strategy<Value = InteractionGraph> {
    ("[a-z]{1,8}", prop::sample::select(vec!["", "Finance", "Utilities"]), state(), vec(graph_op(), 0..8))
        .prop_map(|(app, genre, root, ops)| build_graph(&app, genre, root, ops))
}

pub fn record() -> impl Strategy<Value = TaskRecord> {
    (
        tree(),
        any::<usize>(),
        prop::sample::select(vec![1.0, 2.0]),
        prop::sample::select(vec!["alpha", "beta", "gamma", "delta", "epsilon"]),
        0u64..10_000,
        any::<bool>(),
        text(),
        "[a-zA-Z ]{1,12}",
        vec(action(), 0..4),
    )
        .prop_map(|(tree, pick, scale, app, screen_id, is_type, task, typed, replay_path)| {
            let flat = tree.flatten();
            let el = flat[pick % flat.len()].shallow();
            let action = if is_type {
                ActionSpec::type_text(el.id, typed)
            } else {
                ActionSpec::click(Some(el.id), el.bbox.center().scaled(scale))
            };
            TaskRecord {
                screen_id,
                app_name: app.into(),
                task,
                raw_action: format!("{action:?}"),
                action: format_action(&action).unwrap(),
                element_data: el,
                scaling_factor: scale,
                original_task: !is_type,
                a11y_path: tree.to_json(),
                image_ref: format!("images/{app}/screen_{screen_id:06}.ppm"),
                cropped_image_ref: format!("images/{app}/crop_{screen_id:06}.ppm"),
                task_category: if is_type { "Input".into() } else { "Navigation".into() },
                element_category: el_category(&flat[pick % flat.len()].role),
                replay_path,
            }
        })
}

fn el_category(role: &str) -> String {
    role.trim_start_matches("AX").to_string()
}
