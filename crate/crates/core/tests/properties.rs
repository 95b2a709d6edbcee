use proptest::prelude::*;

use numgame_core::classify::is_symmetrizable;
use numgame_core::fixtures;
use numgame_core::game::{StepBudget, Strategy as Pick};
use numgame_core::{classify, parse_graph, play, AlgebraicReal, EGcmGraph, Outcome, PlayOptions, Position};

type Edge = (usize, usize, i64, i64);

fn build(n: usize, edges: &[Edge]) -> EGcmGraph {
    let mut b = EGcmGraph::builder(n);
    for &(a, c, p, q) in edges {
        b = b.edge(a, c, AlgebraicReal::from_i64(p), AlgebraicReal::from_i64(q));
    }
    b.build().unwrap()
}

/// Integer GCMs on at most four nodes.
fn integer_gcm() -> impl Strategy<Value = (usize, Vec<Edge>)> {
    (1usize..=4).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let k = pairs.len();
        proptest::collection::vec(prop_oneof![2 => Just(None), 3 => (1i64..=3, 1i64..=3).prop_map(Some)], k)
            .prop_map(move |amps| {
                let edges = pairs
                    .iter()
                    .zip(amps)
                    .filter_map(|(&(a, b), pq)| pq.map(|(p, q)| (a, b, p, q)))
                    .collect();
                (n, edges)
            })
    })
}

fn position(values: &[(i64, i64)]) -> Position {
    Position::new(values.iter().map(|&(a, b)| AlgebraicReal::from_ratio(a, b)).collect())
}

fn dominant(n: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    proptest::collection::vec((0i64..=5, 1i64..=3), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn text_form_round_trips((n, edges) in integer_gcm()) {
        let g = build(n, &edges);
        let back = parse_graph(&g.to_dsl()).unwrap();
        prop_assert_eq!(back.digest(), g.digest());
        prop_assert_eq!(back.amplitudes(), g.amplitudes());
    }

    #[test]
    fn verdict_ignores_node_order((n, edges) in integer_gcm(), shift in 0usize..4) {
        let g = build(n, &edges);
        let moved: Vec<Edge> = edges.iter().map(|&(a, b, p, q)| ((a + shift) % n, (b + shift) % n, p, q)).collect();
        let h = build(n, &moved);
        let (v, w) = (classify(&g), classify(&h));
        prop_assert_eq!(v.admissible, w.admissible);
        prop_assert_eq!(v.l_w0(), w.l_w0());
        let mut fv: Vec<_> = v.components.iter().map(|c| c.family).collect();
        let mut fw: Vec<_> = w.components.iter().map(|c| c.family).collect();
        fv.sort_by_key(|f| format!("{f:?}"));
        fw.sort_by_key(|f| format!("{f:?}"));
        prop_assert_eq!(fv, fw);
    }

    #[test]
    fn admissible_games_converge_within_the_longest_length(
        (n, edges) in integer_gcm(),
        values in dominant(4),
        seed in 0u64..1000,
    ) {
        let g = build(n, &edges);
        let v = classify(&g);
        prop_assume!(v.admissible);
        let l = v.l_w0().unwrap() as usize;
        let pos = position(&values[..n]);
        let first = play(&g, &pos, &PlayOptions::default().limit(l + 1)).unwrap();
        let other = play(&g, &pos, &PlayOptions::default().limit(l + 1).strategy(Pick::Random(seed))).unwrap();
        prop_assert!(first.is_converged());
        prop_assert!(first.length() <= l);
        prop_assert_eq!(first.length(), other.length());
        prop_assert_eq!(first.terminal(), other.terminal());
    }

    #[test]
    fn connected_non_admissible_games_keep_going((n, edges) in integer_gcm(), values in dominant(4)) {
        let g = build(n, &edges);
        prop_assume!(g.is_connected() && !classify(&g).admissible);
        let pos = position(&values[..n]);
        prop_assume!(pos.is_nonzero());
        let opts = PlayOptions { budget: StepBudget::Limit(200), ..PlayOptions::default() };
        let t = play(&g, &pos, &opts).unwrap();
        let hit_limit = matches!(t.outcome, Outcome::StepLimitReached { steps: 200, .. });
        prop_assert!(hit_limit);
    }

    #[test]
    fn symmetrizable_graphs_are_unital((n, edges) in integer_gcm()) {
        let g = build(n, &edges);
        if is_symmetrizable(&g) {
            prop_assert!(g.is_unital_oa_cyclic());
        }
        if g.edges().len() < n && g.is_connected() {
            prop_assert!(g.is_unital_oa_cyclic());
        }
    }
}

#[test]
fn fixtures_round_trip_through_text() {
    for name in fixtures::builtin_names() {
        let g = fixtures::builtin(&name).unwrap();
        let back = parse_graph(&g.to_dsl()).unwrap();
        assert_eq!(back.digest(), g.digest(), "{name}");
    }
}
