use excl_core::oracle;
use excl_core::{Error, GraphKind, WeightedGraph};
use proptest::prelude::*;

#[test]
fn construction_examples() {
    let k2 = WeightedGraph::new(2, &[(0, 1, 1.0)]).unwrap();
    assert_eq!(k2.total_weight(), 1.0);
    let p3 = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    assert_eq!(p3.total_weight(), 2.0);
    assert!(matches!(WeightedGraph::new(4, &[(0, 1, 1.0), (2, 3, 1.0)]), Err(Error::DisconnectedGraph)));
    assert!(matches!(WeightedGraph::new(2, &[(0, 0, 1.0)]), Err(Error::InvalidEdge { .. })));
    assert!(matches!(WeightedGraph::new(2, &[(0, 1, 1.0), (1, 0, 2.0)]), Err(Error::InvalidEdge { .. })));
    assert!(matches!(WeightedGraph::new(2, &[(0, 1, 0.0)]), Err(Error::InvalidEdge { .. })));
}

#[test]
fn generator_examples() {
    let c4 = GraphKind::Cycle { n: 4 }.generate(0).unwrap();
    assert_eq!((c4.n(), c4.m()), (4, 4));
    assert!((0..4).all(|v| c4.degree(v) == 2));
    assert_eq!(GraphKind::Complete { n: 4 }.generate(0).unwrap().m(), 6);
    let t = GraphKind::Torus { d: 2, l: 3 }.generate(0).unwrap();
    assert_eq!((t.n(), t.m()), (9, 18));
    let t2 = GraphKind::Torus { d: 2, l: 2 }.generate(0).unwrap();
    assert_eq!((t2.n(), t2.m()), (4, 4));
}

#[test]
fn random_generators_are_connected_and_deterministic() {
    for kind in [
        GraphKind::ErdosRenyiGiant { n: 50, c: 2.0 },
        GraphKind::RandomRegular { n: 20, d: 3 },
        GraphKind::PercolationTorus { d: 2, l: 8, p: 0.6 },
    ] {
        let a = kind.generate(7).unwrap();
        let b = kind.generate(7).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert!(a.is_unit_weighted());
        assert!(a.all_pairs_distances().is_ok());
    }
    let reg = GraphKind::RandomRegular { n: 20, d: 3 }.generate(3).unwrap();
    assert!((0..20).all(|v| reg.degree(v) == 3));
}

#[test]
fn giant_component_size_matches_component_scan() {
    use rand::Rng;
    // re-draw the first realisation of G(50, 2/50) and scan its components
    let n = 50;
    let mut r = excl_core::rng::substream(7, 0);
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(2.0 / n as f64) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut largest = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let (mut stack, mut size) = (vec![s], 0);
        while let Some(x) = stack.pop() {
            size += 1;
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        largest = largest.max(size);
    }
    let g = GraphKind::ErdosRenyiGiant { n, c: 2.0 }.generate(7).unwrap();
    assert_eq!(g.n(), largest);
}

#[test]
fn distance_examples() {
    let c4 = GraphKind::Cycle { n: 4 }.generate(0).unwrap();
    assert_eq!(c4.all_pairs_distances().unwrap().get(0, 2), 2);
    let p3 = GraphKind::Path { n: 3 }.generate(0).unwrap();
    assert_eq!(p3.all_pairs_distances().unwrap().get(0, 2), 2);
    let k5 = GraphKind::Complete { n: 5 }.generate(0).unwrap();
    let d = k5.all_pairs_distances().unwrap();
    assert!((0..5).all(|x| (0..5).all(|y| d.get(x, y) == u32::from(x != y))));
}

#[test]
fn stats_examples() {
    let s = GraphKind::Cycle { n: 4 }.generate(0).unwrap().stats().unwrap();
    assert_eq!(s.avg_weighted_degree, 2.0);
    assert_eq!(s.mean_square_distance, 1.5);
    let s = GraphKind::Complete { n: 2 }.generate(0).unwrap().stats().unwrap();
    assert_eq!(s.mean_square_distance, 0.5);
}

#[test]
fn text_round_trip() {
    let g = WeightedGraph::new(3, &[(0, 1, 0.1), (1, 2, 1.0 / 3.0), (0, 2, 12345.678901234567)]).unwrap();
    let back = WeightedGraph::from_text(&g.to_text()).unwrap();
    assert_eq!(back.edges(), g.edges());
    assert!(WeightedGraph::from_text("2 1\n0 1 x\n").is_err());
}

fn arb_graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..14, any::<u64>(), prop::collection::vec((0usize..200, 0usize..200, 0.1f64..5.0), 0..30)).prop_map(
        |(n, seed, extra)| {
            // a random spanning tree plus extra edges keeps it connected
            let mut edges: Vec<(usize, usize, f64)> = Vec::new();
            let mut s = seed;
            for v in 1..n {
                s = excl_core::rng::splitmix64(s);
                edges.push(((s % v as u64) as usize, v, 1.0 + (s >> 40) as f64 / (1u64 << 24) as f64));
            }
            for (a, b, w) in extra {
                let (a, b) = (a % n, b % n);
                if a != b && !edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
                    edges.push((a, b, w));
                }
            }
            WeightedGraph::new(n, &edges).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn distances_match_floyd_warshall(g in arb_graph()) {
        let d = g.all_pairs_distances().unwrap();
        let fw = oracle::floyd_warshall(&g);
        for x in 0..g.n() {
            for y in 0..g.n() {
                prop_assert_eq!(d.get(x, y) as usize, fw[x][y]);
            }
        }
    }

    #[test]
    fn stats_match_direct_sums(g in arb_graph()) {
        let s = g.stats().unwrap();
        let n = g.n() as f64;
        let w: f64 = g.edges().iter().map(|e| e.w).sum();
        prop_assert!((s.total_weight - w).abs() <= 1e-12 * w);
        prop_assert!((s.avg_weighted_degree - 2.0 * w / n).abs() <= 1e-12 * w);
        let fw = oracle::floyd_warshall(&g);
        let msd: f64 = fw.iter().flatten().map(|&d| (d * d) as f64).sum::<f64>() / (n * n);
        prop_assert!((s.mean_square_distance - msd).abs() <= 1e-12 * msd.max(1.0));
        let deg: f64 = (0..g.n()).map(|v| g.weighted_degree(v)).sum();
        prop_assert!((deg - 2.0 * w).abs() <= 1e-9);
    }

    #[test]
    fn text_format_round_trips(g in arb_graph()) {
        let back = WeightedGraph::from_text(&g.to_text()).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
    }
}
