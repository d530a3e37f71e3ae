mod support;

use dashgraph::analysis::SimpleGraph;
use dashgraph::geometry::{classify, detect_adjacency, Rect, Tolerance};
use dashgraph::graph::{build_adjacency_graph, build_graphs, max_possible_interactions};
use dashgraph::model::{AdjacencyConfig, BlockType, EdgeClass};
use proptest::prelude::*;
use rand::Rng;

use support::*;

fn rect_strategy() -> impl Strategy<Value = Rect> {
    (0i64..60, 0i64..60, 1i64..30, 1i64..30).prop_map(|(x, y, w, h)| Rect::new(x, y, w, h))
}

#[test]
fn classify_matches_pixel_oracle_on_random_pairs() {
    let mut r = rng(3);
    for t in [0, 5, 10] {
        for _ in 0..1000 {
            let (ax, ay, aw, ah) = random_rect(&mut r);
            let (bx, by, bw, bh) = random_rect(&mut r);
            let (a, b) = (Rect::new(ax, ay, aw, ah), Rect::new(bx, by, bw, bh));
            assert_eq!(
                classify(&a, &b, Tolerance(t)),
                pixel_oracle(&a, &b, Tolerance(t)),
                "{a:?} {b:?} t={t}"
            );
        }
    }
}

#[test]
fn named_configurations() {
    let t = Tolerance(10);
    let big = Rect::new(0, 0, 100, 100);
    assert_eq!(
        classify(&big, &Rect::new(10, 10, 20, 20), t),
        Some(AdjacencyConfig::Containment)
    );
    assert_eq!(classify(&big, &big, t), Some(AdjacencyConfig::Containment));
    assert_eq!(
        classify(&big, &Rect::new(50, 50, 100, 100), t),
        Some(AdjacencyConfig::PartialOverlap)
    );
    assert_eq!(
        classify(&big, &Rect::new(100, 0, 50, 50), t),
        Some(AdjacencyConfig::Adjoining)
    );
    assert_eq!(
        classify(&big, &Rect::new(110, 0, 50, 50), t),
        Some(AdjacencyConfig::Adjoining)
    );
    assert_eq!(classify(&big, &Rect::new(111, 0, 50, 50), t), None);
    // Corner contact only.
    assert_eq!(classify(&big, &Rect::new(100, 100, 50, 50), t), None);
    assert_eq!(classify(&big, &Rect::new(105, 105, 50, 50), t), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn adjacency_is_symmetric(a in rect_strategy(), b in rect_strategy(), t in 0u32..15) {
        prop_assert_eq!(classify(&a, &b, Tolerance(t)), classify(&b, &a, Tolerance(t)));
    }

    #[test]
    fn tolerance_is_monotone(a in rect_strategy(), b in rect_strategy(), t in 0u32..15, extra in 0u32..15) {
        if let Some(c) = classify(&a, &b, Tolerance(t)) {
            prop_assert_eq!(classify(&a, &b, Tolerance(t + extra)), Some(c));
        }
    }

    #[test]
    fn interaction_bound_holds(seed in any::<u64>()) {
        let d = random_dashboard(&mut rng(seed), "d");
        let g = build_graphs(&d, Tolerance(10)).unwrap();
        prop_assert!(g.interaction_edges.len() as u64 <= max_possible_interactions(&g.nodes));
        prop_assert!(g.check().is_empty());
    }

    #[test]
    fn adjacency_graph_ignores_block_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_dashboard(&mut r, "d");
        let mut shuffled = d.blocks.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut r);
        prop_assert_eq!(build_adjacency_graph(&d.blocks, Tolerance(10)), build_adjacency_graph(&shuffled, Tolerance(10)));
    }
}

#[test]
fn adjacency_graph_edges_match_pairwise_detection() {
    let mut r = rng(9);
    for _ in 0..100 {
        let d = random_dashboard(&mut r, "d");
        let t = Tolerance(r.random_range(0..12));
        let edges = build_adjacency_graph(&d.blocks, t);
        let mut expected = 0;
        for (i, a) in d.blocks.iter().enumerate() {
            for b in &d.blocks[i + 1..] {
                if let Some(c) = detect_adjacency(a, b, t) {
                    expected += 1;
                    let (s, u) = if a.id < b.id { (&a.id, &b.id) } else { (&b.id, &a.id) };
                    assert!(edges.iter().any(|e| &e.source == s && &e.target == u && e.config == c));
                }
            }
        }
        assert_eq!(edges.len(), expected);
    }
}

#[test]
fn edge_classes_follow_endpoint_types() {
    let mut r = rng(17);
    for _ in 0..200 {
        let g = build_graphs(&random_dashboard(&mut r, "d"), Tolerance(10)).unwrap();
        let types = g.block_types();
        for e in &g.interaction_edges {
            assert_ne!(e.source, e.target);
            assert_eq!(types[e.target.as_str()], BlockType::Chart);
            let expected = match types[e.source.as_str()] {
                BlockType::Filter => EdgeClass::FilterToChart,
                BlockType::Legend => EdgeClass::LegendToChart,
                BlockType::Chart => EdgeClass::ChartToChart,
                other => panic!("unexpected source type {other}"),
            };
            assert_eq!(e.edge_class, expected);
        }
    }
}

#[test]
fn fixture_interaction_counts() {
    let counts: Vec<usize> = ["agents", "plastics", "coffee"]
        .iter()
        .map(|n| {
            build_graphs(&load_fixture(n), Tolerance(10))
                .unwrap()
                .interaction_edges
                .len()
        })
        .collect();
    assert_eq!(counts, vec![12, 0, 8]);
}

#[test]
fn agents_saturates_the_bound() {
    let g = build_graphs(&load_fixture("agents"), Tolerance(10)).unwrap();
    assert_eq!(max_possible_interactions(&g.nodes), 12);
    assert_eq!(g.interaction_edges.len(), 12);
    // The tall bar chart touches each of the three stacked charts.
    let bar_neighbours = g
        .adjacency_edges
        .iter()
        .filter(|e| e.source == "agents" || e.target == "agents")
        .count();
    assert_eq!(bar_neighbours, 3);
}

#[test]
fn coffee_adjacency_is_disconnected() {
    let g = build_graphs(&load_fixture("coffee"), Tolerance(10)).unwrap();
    assert!(SimpleGraph::adjacency(&g).components() >= 2);
}

#[test]
fn plastics_text_inside_chart_is_containment() {
    let g = build_graphs(&load_fixture("plastics"), Tolerance(10)).unwrap();
    assert!(g.adjacency_edges.iter().any(|e| {
        let pair = (e.source.as_str(), e.target.as_str());
        pair == ("item_note", "plastic_by_item") || pair == ("plastic_by_item", "item_note")
    } && e.config == AdjacencyConfig::Containment));
}
