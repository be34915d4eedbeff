use colmem_core::community::{louvain_levels, modularity, Partition};
use colmem_core::hebbian::{learn_weights, learn_weights_parallel};
use colmem_core::hopfield::{mask_pattern, recall_step};
use colmem_core::preprocess::{activity_indicator, burstiness, filter_min_visits};
use colmem_core::recall_eval::recall_accuracy;
use colmem_core::stats::powerlaw_exponent;
use colmem_core::*;
use proptest::prelude::*;

/// Random graph: up to 12 nodes, sparse integer series, random edges.
fn arb_graph() -> impl Strategy<Value = TemporalGraph> {
    (1usize..12, 1usize..30).prop_flat_map(|(n, t)| {
        let series = proptest::collection::vec(
            prop_oneof![3 => Just(0u32), 2 => 0u32..5, 1 => 0u32..400],
            n * t,
        );
        let edges = proptest::collection::vec((0..n as u32, 0..n as u32), 0..(n * n));
        (Just(n), Just(t), series, edges).prop_map(|(n, t, series, edges)| {
            let mut b = GraphBuilder::new(HourStamp(1_000), t);
            for i in 0..n {
                b.add_node(format!("n{i}"), &series[i * t..(i + 1) * t])
                    .unwrap();
            }
            for (a, c) in edges {
                if a != c {
                    b.add_edge(NodeId(a), NodeId(c)).unwrap();
                }
            }
            b.build()
        })
    })
}

fn arb_weighted() -> impl Strategy<Value = TemporalGraph> {
    arb_graph().prop_flat_map(|g| {
        let m = g.edge_count();
        let w = proptest::collection::vec(prop_oneof![1 => Just(0.0), 3 => 0.0f64..10.0], m);
        (Just(g), w).prop_map(|(g, w)| g.with_weights(w).unwrap())
    })
}

fn arb_pattern(nodes: usize, hours: usize) -> impl Strategy<Value = Pattern> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], nodes * hours)
        .prop_map(move |cells| Pattern::from_cells(nodes, hours, HourStamp(0), cells).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn neighbor_lists_are_symmetric(g in arb_weighted()) {
        for v in g.node_ids() {
            for (u, w) in g.neighbors(v).unwrap() {
                let back = g.neighbors(u).unwrap();
                prop_assert!(back.iter().any(|&(x, wx)| x == v && wx.to_bits() == w.to_bits()));
            }
        }
    }

    #[test]
    fn prune_is_idempotent_and_keeps_labels(g in arb_weighted(), k in 1usize..5) {
        let (p1, map) = g.prune(k);
        let (p2, _) = p1.prune(k);
        prop_assert_eq!(&p1, &p2);
        for v in p1.node_ids() {
            let old = map.old_id(v).unwrap();
            prop_assert_eq!(g.label(old).unwrap(), p1.label(v).unwrap());
            prop_assert_eq!(map.new_id(old), Some(v));
        }
    }

    #[test]
    fn min_visit_filter_is_monotone(g in arb_graph(), lo in 0u32..100, step in 0u32..300) {
        let a = filter_min_visits(&g, lo);
        let b = filter_min_visits(&g, lo + step);
        prop_assert!(b.labels().iter().all(|l| a.node_id(l).is_some()));
    }

    #[test]
    fn indicator_ignores_scale_and_offset(
        x in proptest::collection::vec(0u32..1000, 1..60),
        c in 1u32..50,
        off in 0u32..10_000,
        n in prop_oneof![Just(5.0), Just(1.0), Just(2.5), 0.1f64..8.0],
    ) {
        let k = activity_indicator(&x, n).unwrap();
        let scaled: Vec<u32> = x.iter().map(|v| v * c).collect();
        let shifted: Vec<u32> = x.iter().map(|v| v + off).collect();
        prop_assert_eq!(&k, &activity_indicator(&scaled, n).unwrap());
        prop_assert_eq!(&k, &activity_indicator(&shifted, n).unwrap());
    }

    #[test]
    fn burstiness_non_increasing_in_n(x in proptest::collection::vec(0u32..500, 1..80), a in 0.01f64..6.0, d in 0.0f64..3.0) {
        prop_assert!(burstiness(&x, a + d).unwrap() <= burstiness(&x, a).unwrap());
    }

    #[test]
    fn learning_invariants(g in arb_graph(), lambda in prop_oneof![Just(0.5), 0.0f64..1.0], cut in 0usize..30) {
        let cfg = LearnConfig { lambda };
        let learned = learn(&g, &cfg).unwrap();
        prop_assert_eq!(learned.edges(), g.edges());
        let t = g.horizon() as f64;
        for &(a, b) in learned.edges() {
            let w = learned.edge_weight(a, b).unwrap();
            prop_assert_eq!(w.to_bits(), learned.edge_weight(b, a).unwrap().to_bits());
            prop_assert!((0.0..=t).contains(&w));
        }
        let cut = cut.min(g.horizon());
        if cut > 0 && cut < g.horizon() {
            let left = learn_weights(&g.slice_window(TimeWindow::new(0, cut).unwrap()).unwrap(), &cfg).unwrap();
            let right = learn_weights(&g.slice_window(TimeWindow::new(cut, g.horizon()).unwrap()).unwrap(), &cfg).unwrap();
            for ((l, r), w) in left.iter().zip(&right).zip(learned.weights()) {
                prop_assert!((l + r - w).abs() <= 1e-9 * w.max(1.0));
            }
        }
        for threads in [2, 3, 8] {
            let par = learn_weights_parallel(&g, &cfg, threads).unwrap();
            prop_assert!(par.iter().zip(learned.weights()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn recall_works_column_by_column((g, p) in arb_weighted().prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), arb_pattern(n, 6))
    })) {
        let whole = recall_step(&g, &p, 0.0).unwrap();
        for t in 0..p.hours() {
            let col = p.slice_hours(TimeWindow::new(t, t + 1).unwrap()).unwrap();
            let out = recall_step(&g, &col, 0.0).unwrap();
            for i in 0..p.node_count() {
                prop_assert_eq!(out.get(i, 0), whole.get(i, t));
            }
        }
    }

    #[test]
    fn raising_theta_never_activates((g, p) in arb_weighted().prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), arb_pattern(n, 4))
    }), lo in -5.0f64..5.0, d in 0.0f64..5.0) {
        let a = recall_step(&g, &p, lo).unwrap();
        let b = recall_step(&g, &p, lo + d).unwrap();
        for (x, y) in a.cells().iter().zip(b.cells()) {
            prop_assert!(!(*x < 0 && *y > 0));
        }
    }

    #[test]
    fn modularity_scale_invariant(g in arb_weighted(), c in 0.001f64..1000.0, gamma in 0.0f64..3.0, seed in 0u64..1000) {
        prop_assume!(g.total_weight() > 0.0);
        let part = louvain_levels(&g, 1.0, seed).unwrap().partition;
        let scaled = g.clone().with_weights(g.weights().iter().map(|w| w * c).collect()).unwrap();
        let q = modularity(&g, &part, gamma).unwrap();
        let qs = modularity(&scaled, &part, gamma).unwrap();
        prop_assert!((q - qs).abs() <= 1e-12 * q.abs().max(1.0), "{} vs {}", q, qs);
    }

    #[test]
    fn louvain_improves_on_singletons_and_agrees_with_levels(g in arb_weighted(), seed in 0u64..1000) {
        prop_assume!(g.total_weight() > 0.0);
        let out = louvain_levels(&g, 1.0, seed).unwrap();
        let q = modularity(&g, &out.partition, 1.0).unwrap();
        let q0 = modularity(&g, &Partition::singletons(g.node_count()), 1.0).unwrap();
        prop_assert!(q >= q0 - 1e-12);
        prop_assert!((q - out.level_modularity.last().unwrap()).abs() <= 1e-9);
        prop_assert_eq!(&out, &louvain_levels(&g, 1.0, seed).unwrap());
    }

    #[test]
    fn powerlaw_exponent_scale_invariant(xs in proptest::collection::vec(1.0f64..1e4, 10..200), c in 1e-3f64..1e3) {
        let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
        if let Ok(a) = powerlaw_exponent(&xs, 1.0) {
            let b = powerlaw_exponent(&scaled, c).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a, "{} vs {}", a, b);
        }
    }

    #[test]
    fn per_node_strict_at_most_relaxed((orig, rec) in (1usize..20).prop_flat_map(|h| (arb_pattern(1, h), arb_pattern(1, h)))) {
        if let Ok(strict) = recall_accuracy(&orig, &rec, None, false) {
            let relaxed = recall_accuracy(&orig, &rec, None, true).unwrap();
            prop_assert!((0.0..=1.0).contains(&strict));
            prop_assert!(strict <= relaxed);
        }
    }

    #[test]
    fn masked_input_scores_its_kept_share(p in arb_pattern(8, 10), keep in proptest::collection::btree_set(0u32..8, 0..8)) {
        prop_assume!(p.active_count() > 0);
        let keep: Vec<NodeId> = keep.into_iter().map(NodeId).collect();
        let masked = mask_pattern(&p, &keep).unwrap();
        let kept: usize = keep.iter().map(|v| p.row(v.index()).iter().filter(|&&c| c > 0).count()).sum();
        let a = recall_accuracy(&p, &masked, None, false).unwrap();
        prop_assert_eq!(a, kept as f64 / p.active_count() as f64);
    }
}

#[test]
fn strict_can_exceed_relaxed_when_activity_is_uneven() {
    let mut orig = Pattern::inactive(2, 10, HourStamp(0));
    for t in 0..10 {
        orig.set(0, t, true);
    }
    orig.set(1, 0, true);
    let mut rec = orig.clone();
    rec.set(1, 0, false);
    let strict = recall_accuracy(&orig, &rec, None, false).unwrap();
    let relaxed = recall_accuracy(&orig, &rec, None, true).unwrap();
    assert_eq!((strict, relaxed), (10.0 / 11.0, 0.5));
}
