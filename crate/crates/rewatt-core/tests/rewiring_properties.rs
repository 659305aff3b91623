//! Randomized structural properties of the rewiring operation.

use proptest::prelude::*;

use rewatt_core::graph::{
    apply_rewiring, is_valid_rewiring, k_hop_neighbors, rewiring_candidates, Graph,
};
use rewatt_core::numeric::DenseMatrix;

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (2..=max_nodes)
        .prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .collect();
            let m = pairs.len();
            (Just(n), Just(pairs), proptest::collection::vec(any::<bool>(), m))
        })
        .prop_map(|(n, pairs, mask)| {
            let edges: Vec<(usize, usize)> = pairs
                .into_iter()
                .zip(mask)
                .filter(|(_, keep)| *keep)
                .map(|(e, _)| e)
                .collect();
            Graph::new(n, &edges, DenseMatrix::zeros(n, 1), None).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rewiring_preserves_counts_and_simplicity(g in graph_strategy(10)) {
        for a in rewiring_candidates(&g) {
            let g2 = apply_rewiring(&g, &a).unwrap();
            prop_assert_eq!(g2.num_nodes(), g.num_nodes());
            prop_assert_eq!(g2.num_edges(), g.num_edges());
            let deg_sum: usize = (0..g.num_nodes()).map(|v| g.degree(v)).sum();
            let deg_sum2: usize = (0..g2.num_nodes()).map(|v| g2.degree(v)).sum();
            prop_assert_eq!(deg_sum, deg_sum2);
            // Graph::new would have rejected self-loops or duplicates; check
            // the canonical list is strictly increasing anyway
            for w in g2.edges().windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for &(u, v) in g2.edges() {
                prop_assert!(u < v);
            }
        }
    }

    #[test]
    fn candidates_sound_and_sorted(g in graph_strategy(9)) {
        let cands = rewiring_candidates(&g);
        for a in &cands {
            prop_assert!(is_valid_rewiring(&g, a));
        }
        for w in cands.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn one_and_two_hop_sets_disjoint(g in graph_strategy(10)) {
        for v in 0..g.num_nodes() {
            let h1 = k_hop_neighbors(&g, v, 1).unwrap();
            let h2 = k_hop_neighbors(&g, v, 2).unwrap();
            prop_assert!(h1.iter().all(|u| !h2.contains(u)));
            prop_assert!(!h1.contains(&v));
            prop_assert!(!h2.contains(&v));
        }
    }

    #[test]
    fn added_edge_is_always_new(g in graph_strategy(10)) {
        // thi outside N^1(fir) guarantees the added edge did not exist
        for a in rewiring_candidates(&g) {
            prop_assert!(!g.has_edge(a.fir, a.thi));
            let g2 = apply_rewiring(&g, &a).unwrap();
            prop_assert!(g2.has_edge(a.fir, a.thi));
            prop_assert!(!g2.has_edge(a.fir, a.sec));
        }
    }
}
