mod common;

use proptest::prelude::*;

use axcrawl::ax::{canonical_hash, diff, AxTree, BBox, HashMode, Point, UiElement};
use axcrawl::backend::SessionFactory;
use axcrawl::ax::ActionSpec;
use axcrawl::crawler::{is_significant, is_significant_with, SignificanceMode};
use axcrawl::eval::{evaluate, judge, parse_prediction, FixedPoint, RandomClick};
use axcrawl::graph::InteractionGraph;
use axcrawl::tasks::{format_action, from_jsonl, parse_action, split, to_jsonl};
use common::gen;

fn fresh_ids(t: &AxTree, offset: u32, stride: u32) -> AxTree {
    let mut root = t.root().clone();
    gen::number(&mut root, &mut offset.clone(), stride);
    AxTree::new(root, t.window_bbox()).unwrap()
}

proptest! {
    #[test]
    fn hash_ignores_ids(t in gen::tree(), offset in 1u32..1_000_000, stride in 1u32..7) {
        let u = fresh_ids(&t, offset, stride);
        for m in [HashMode::Strict, HashMode::LayoutInsensitive] {
            prop_assert_eq!(canonical_hash(&t, m), canonical_hash(&u, m));
        }
    }

    #[test]
    fn diff_laws(a in gen::tree(), b in gen::tree()) {
        prop_assert!(diff(&a, &a).is_empty());
        let ab = diff(&a, &b);
        let ba = diff(&b, &a);
        prop_assert_eq!(ab.added.len(), ba.removed.len());
        prop_assert_eq!(&ab.added, &ba.removed);
        prop_assert_eq!(&ab.changed, &ba.changed);
    }

    #[test]
    fn locate_is_total(t in gen::tree(), fx in 0.0f64..=1.0, fy in 0.0f64..=1.0) {
        let w = t.window_bbox();
        let mut root = t.root().clone();
        root.bbox = w;
        let t = AxTree::new(root, w).unwrap();
        let p = Point::new(w.x + fx * w.w, w.y + fy * w.h);
        let hit = t.locate(p);
        prop_assert!(hit.is_some());
        prop_assert!(hit.unwrap().bbox.contains(p));
    }

    #[test]
    fn significance_boundary(threshold in 0u32..40, added in 0usize..40, removed in 0usize..40) {
        let t = gen_tree_with(added + removed);
        let empty = gen_tree_with(0);
        let mut d = diff(&empty, &t);
        let moved: Vec<_> = d.added.iter().take(removed).cloned().collect();
        for s in moved {
            d.added.remove(&s);
            d.removed.insert(s);
        }
        prop_assert_eq!(is_significant(&d, threshold), added + removed > threshold as usize);
        prop_assert_eq!(
            is_significant_with(&d, threshold, SignificanceMode::EitherAlone),
            added > threshold as usize || removed > threshold as usize
        );
    }

    #[test]
    fn action_format_roundtrip(a in gen::action()) {
        let s = format_action(&a).unwrap();
        let back = parse_action(&s).unwrap();
        prop_assert_eq!(back.kind, a.kind);
        prop_assert_eq!(&back.text, &a.text);
        prop_assert_eq!(back.point, a.point.map(|p| Point::new(p.x.round(), p.y.round())));
        prop_assert_eq!(format_action(&back).unwrap(), s);
    }

    #[test]
    fn prediction_grammar_accepts_emitted_actions(r in gen::record()) {
        let p = parse_prediction(&r.action).unwrap();
        prop_assert!(judge(&p, &r));
    }

    #[test]
    fn judge_is_scale_invariant(r in gen::record(), x in -100.0f64..1600.0, y in -100.0f64..1100.0, k in prop::sample::select(vec![0.25, 0.5, 2.0, 3.0, 4.0])) {
        let pred = |r: &axcrawl::tasks::TaskRecord, x: f64, y: f64| judge(&parse_prediction(&format!("left click, ({x}, {y})")).unwrap(), r);
        let mut scaled = r.clone();
        scaled.scaling_factor *= k;
        prop_assert_eq!(pred(&r, x, y), pred(&scaled, x * k, y * k));
    }

    #[test]
    fn category_tallies_sum_to_overall(rs in prop::collection::vec(gen::record(), 1..20), seed in any::<u64>()) {
        for rep in [evaluate(&rs, &RandomClick { seed }, 3).unwrap(), evaluate(&rs, &FixedPoint(Point::new(20.0, 20.0)), 1).unwrap()] {
            for axis in [&rep.by_task_category, &rep.by_element_category] {
                prop_assert_eq!(axis.values().map(|t| t.successes).sum::<u64>(), rep.overall.successes);
                prop_assert_eq!(axis.values().map(|t| t.total).sum::<u64>(), rep.overall.total);
            }
        }
    }

    #[test]
    fn graph_roundtrip(g in gen::graph()) {
        let bytes = g.serialize();
        let back = InteractionGraph::deserialize(&bytes).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.serialize(), bytes);
    }

    #[test]
    fn graph_nodes_stay_reachable(g in gen::graph()) {
        prop_assert_eq!(g.reachable().len(), g.nodes.len());
    }

    #[test]
    fn dataset_roundtrip(rs in prop::collection::vec(gen::record(), 0..12)) {
        let text = to_jsonl(&rs);
        prop_assert_eq!(text.lines().count(), rs.len());
        let back = from_jsonl(&text).unwrap();
        prop_assert_eq!(&back, &rs);
        prop_assert_eq!(to_jsonl(&back), text);
    }

    #[test]
    fn split_is_a_partition(rs in prop::collection::vec(gen::record(), 1..30), f in 0.0f64..=1.0) {
        if let Ok(s) = split(&rs, f) {
            prop_assert!(s.manifest.train_apps.is_disjoint(&s.manifest.test_apps));
            prop_assert_eq!(s.train.len(), s.manifest.train_count);
            prop_assert_eq!(s.test.len(), s.manifest.test_count);
            prop_assert_eq!(s.train.len() + s.test.len(), rs.len());
            prop_assert!(s.train.iter().all(|r| s.manifest.train_apps.contains(&r.app_name)));
            prop_assert!(s.test.iter().all(|r| s.manifest.test_apps.contains(&r.app_name)));
        }
    }

    #[test]
    fn sim_replay_is_deterministic(clicks in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..6), fixture in prop::sample::select(vec!["stocks", "maps", "weather", "music"])) {
        let b = common::backend(fixture);
        let mut observed = Vec::new();
        for _ in 0..2 {
            let mut s = b.start().unwrap();
            let mut trace = vec![s.observe().unwrap().tree.to_json()];
            for (fx, fy) in &clicks {
                let w = s.observe().unwrap().tree.window_bbox();
                s.perform(&ActionSpec::click(None, Point::new(w.x + fx * w.w, w.y + fy * w.h))).unwrap();
                trace.push(s.observe().unwrap().tree.to_json());
            }
            observed.push(trace);
        }
        prop_assert_eq!(&observed[0], &observed[1]);
    }
}

fn gen_tree_with(n: usize) -> AxTree {
    let w = BBox::of(0.0, 0.0, 100.0, 100.0);
    let kids = (0..n).map(|i| UiElement::new(i as u32 + 1, "AXStaticText", w).named(format!("t{i}"))).collect();
    AxTree::new(UiElement::new(0, "AXWindow", w).with_children(kids), w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flatten_counts_large_trees(n in 1usize..=10_000, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let parents: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            kids[*p].push(i + 1);
        }
        fn build(i: usize, kids: &[Vec<usize>]) -> UiElement {
            let mut e = UiElement::new(i as u32, "AXGroup", BBox::of(0.0, 0.0, 10.0, 10.0));
            e.children = kids[i].iter().map(|&c| build(c, kids)).collect();
            e
        }
        // deep chains would overflow the test thread's stack in a recursive builder
        let root = std::thread::Builder::new().stack_size(256 << 20).spawn(move || build(0, &kids)).unwrap().join().unwrap();
        let t = AxTree::new(root, BBox::of(0.0, 0.0, 10.0, 10.0)).unwrap();
        prop_assert_eq!(t.element_count(), n);
        prop_assert_eq!(t.flatten().len(), n);
        let big = std::thread::Builder::new().stack_size(256 << 20).spawn(move || drop(t)).unwrap();
        big.join().unwrap();
    }
}
