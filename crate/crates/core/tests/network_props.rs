use dfp_core::consensus::{
    build_weight_matrix, lemma1_bound, product_phi, step_tracking, MatrixProduct, TrackingState,
    WeightMatrix, WeightRule, WeightScheme,
};
use dfp_core::graph::{is_connected, validate_window_connectivity, EdgeSet, GraphKind, GraphSequence, Topology};
use proptest::prelude::*;

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![Just(Topology::Ring), Just(Topology::Star), Just(Topology::Complete)]
}

fn kind() -> impl Strategy<Value = GraphKind> {
    prop_oneof![
        Just(GraphKind::Static),
        Just(GraphKind::EdgeCycle),
        (0.0..=1.0f64).prop_map(|p| GraphKind::SeededRandom { p }),
        (1usize..5, 0.0..=1.0f64).prop_map(|(window, p)| GraphKind::Windowed { window, p }),
    ]
}

fn random_edges(n: usize) -> impl Strategy<Value = EdgeSet> {
    prop::collection::vec((0..n, 0..n), 0..2 * n).prop_map(|pairs| {
        EdgeSet::new(pairs.into_iter().filter(|(a, b)| a != b)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sequences_are_symmetric_deterministic_and_inside_the_base(
        n in 2usize..7,
        kind in kind(),
        base in topology(),
        seed in any::<u64>(),
    ) {
        let a = GraphSequence::new(n, kind.clone(), base.clone(), seed).unwrap();
        let b = GraphSequence::new(n, kind, base, seed).unwrap();
        for t in 0..10_000 {
            let e = a.edges_at(t);
            prop_assert_eq!(&e, &b.edges_at(t));
            for (i, j) in e.iter() {
                prop_assert!(i < j && j < n);
                prop_assert!(a.base_edges().contains(i, j));
            }
            let adj = e.adjacency(n);
            for (i, row) in adj.iter().enumerate() {
                for &k in row {
                    prop_assert!(adj[k].contains(&i));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_cycle_is_connected_over_its_period(n in 2usize..9, base in topology(), shift in 0usize..50) {
        let seq = GraphSequence::new(n, GraphKind::EdgeCycle, base, 0).unwrap();
        let m = seq.base_edges().len();
        let report = validate_window_connectivity(&seq, m, shift, shift + 3 * m).unwrap();
        prop_assert!(report.connected);
        // fewer than n − 1 edges cannot span the graph
        if n > 2 {
            let short = validate_window_connectivity(&seq, n - 2, shift, shift + 3 * m).unwrap();
            prop_assert!(!short.connected);
            prop_assert_eq!(short.first_failure, Some(shift));
        }
    }

    #[test]
    fn window_connectivity_is_monotone_in_the_window(
        n in 2usize..7,
        kind in kind(),
        base in topology(),
        seed in any::<u64>(),
        window in 1usize..6,
    ) {
        let seq = GraphSequence::new(n, kind, base, seed).unwrap();
        let r = validate_window_connectivity(&seq, window, 1, 200).unwrap();
        if r.connected {
            for longer in [window + 1, 2 * window, 3 * window] {
                prop_assert!(validate_window_connectivity(&seq, longer, 1, 200).unwrap().connected);
            }
        }
    }

    #[test]
    fn weight_matrices_respect_the_weight_assumptions(
        (n, edges) in (2usize..8).prop_flat_map(|n| (Just(n), random_edges(n))),
        pick in 0usize..8,
        direct in any::<bool>(),
    ) {
        let tracked = pick % n;
        let rule = if direct { WeightRule::DirectSource } else { WeightRule::UniformClosedNeighborhood };
        let scheme = WeightScheme::new(1.0 / n as f64, rule).unwrap();
        let adj = edges.adjacency(n);
        let w = build_weight_matrix(&scheme, tracked, &adj).unwrap();
        for (i, row) in w.entries().iter().enumerate() {
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            for (k, &x) in row.iter().enumerate() {
                prop_assert!(x >= 0.0);
                if x > 0.0 {
                    prop_assert!(x >= scheme.eta() - 1e-12);
                    prop_assert!(i == k || adj[i].contains(&k));
                }
            }
        }
        prop_assert_eq!(&w.entries()[tracked], &{
            let mut e = vec![0.0; n];
            e[tracked] = 1.0;
            e
        });
        if !direct {
            w.check_support(scheme.eta(), Some(&adj)).unwrap();
        }
    }

    #[test]
    fn lemma1_bound_is_monotone(
        n in 2usize..8,
        window in 1usize..4,
        s in 0usize..100,
        gap in 0usize..1000,
    ) {
        let eta = 1.0 / n as f64;
        let b = lemma1_bound(n, eta, window, s + gap, s).unwrap();
        let next = lemma1_bound(n, eta, window, s + gap + 1, s).unwrap();
        prop_assert!(b.kappa >= (n - 1) as f64);
        prop_assert!(b.rho > 0.0 && b.rho <= 1.0);
        // ρ rounds to 1 once η^{(n−1)T} drops below machine precision
        if eta.powi(((n - 1) * window) as i32) > 1e-12 {
            prop_assert!(b.rho < 1.0);
        }
        prop_assert!(next.bound <= b.bound);
        // only the gap matters
        let shifted = lemma1_bound(n, eta, window, gap, 0).unwrap();
        prop_assert_eq!(b.bound, shifted.bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn long_products_stay_row_stochastic(
        n in 2usize..6,
        kind in kind(),
        base in topology(),
        seed in any::<u64>(),
    ) {
        let seq = GraphSequence::new(n, kind, base, seed).unwrap();
        let scheme = WeightScheme::uniform(n).unwrap();
        let tracked = n - 1;
        let mut phi: Option<MatrixProduct> = None;
        for t in 0..10_000 {
            let w = build_weight_matrix(&scheme, tracked, &seq.edges_at(t).adjacency(n)).unwrap();
            match phi.as_mut() {
                None => phi = Some(MatrixProduct::start(&w, t)),
                Some(p) => p.push(&w).unwrap(),
            }
        }
        let phi = phi.unwrap();
        for (i, row) in phi.entries().iter().enumerate() {
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "row {i} sums to {sum}");
            prop_assert!(row.iter().all(|&x| x >= 0.0));
        }
        // the stubborn row survives every product unchanged
        for (k, &x) in phi.entries()[tracked].iter().enumerate() {
            prop_assert_eq!(x, if k == tracked { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn product_phi_matches_explicit_multiplication(
        (n, edge_sets) in (2usize..5).prop_flat_map(|n| (Just(n), prop::collection::vec(random_edges(n), 1..8))),
    ) {
        let scheme = WeightScheme::uniform(n).unwrap();
        let ms: Vec<WeightMatrix> = edge_sets
            .iter()
            .map(|e| build_weight_matrix(&scheme, 0, &e.adjacency(n)).unwrap())
            .collect();
        let phi = product_phi(&ms, 3).unwrap();
        prop_assert_eq!(phi.len(), ms.len());
        // newest factor on the left: Φ = W_last · … · W_first
        let mut expect: Vec<Vec<f64>> = ms[0].entries().to_vec();
        for w in &ms[1..] {
            let mut next = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        next[i][k] += w.get(i, m) * expect[m][k];
                    }
                }
            }
            expect = next;
        }
        for i in 0..n {
            for k in 0..n {
                prop_assert!((phi.get(i, k) - expect[i][k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn tracking_keeps_the_stubborn_entry_exact(
        n in 2usize..6,
        values in prop::collection::vec(-1.0..1.0f64, 1..200),
        seed in any::<u64>(),
    ) {
        let seq = GraphSequence::new(n, GraphKind::SeededRandom { p: 0.5 }, Topology::Complete, seed).unwrap();
        let scheme = WeightScheme::uniform(n).unwrap();
        let tracked = seed as usize % n;
        let mut state = TrackingState::agreed(n, tracked, 0.0);
        for (t, &v) in values.iter().enumerate() {
            let w = build_weight_matrix(&scheme, tracked, &seq.edges_at(t).adjacency(n)).unwrap();
            state = step_tracking(&state, &w, v).unwrap();
            prop_assert_eq!(state.x[tracked].to_bits(), v.to_bits());
            let lo = values[..=t].iter().cloned().fold(0.0f64, f64::min);
            let hi = values[..=t].iter().cloned().fold(0.0f64, f64::max);
            prop_assert!(state.x.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
        }
    }

    #[test]
    fn connectivity_matches_union_find(
        (n, edges) in (1usize..8).prop_flat_map(|n| (Just(n), random_edges(n.max(2)))),
    ) {
        let edges = EdgeSet::new(edges.iter().filter(|&(a, b)| a < n && b < n)).unwrap();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for (a, b) in edges.iter() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let roots: std::collections::HashSet<_> = (0..n).map(|x| find(&mut parent, x)).collect();
        prop_assert_eq!(is_connected(n, &edges), roots.len() <= 1);
    }
}
