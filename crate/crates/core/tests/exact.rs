use std::sync::Arc;

use excl_core::exact::{
    self, build_generator, enumerate_states, mixing_time, negative_correlation_report, tv, tv_distance,
    transition_distribution, worst_case_distance, DiscreteDistribution, ProcessKind, StateSpace, DEFAULT_TOL,
};
use excl_core::{oracle, GraphKind, WeightedGraph};
use proptest::prelude::*;

fn gen(spec: &str) -> WeightedGraph {
    WeightedGraph::generate(&GraphKind::parse(spec).unwrap(), 0).unwrap()
}

#[test]
fn state_space_sizes() {
    let c4 = gen("cycle:4");
    assert_eq!(enumerate_states(&c4, ProcessKind::ExK, 2, 100).unwrap().len(), 6);
    assert_eq!(enumerate_states(&c4, ProcessKind::IpK, 2, 100).unwrap().len(), 12);
    assert_eq!(enumerate_states(&gen("path:3"), ProcessKind::Rw, 1, 100).unwrap().len(), 3);
    assert_eq!(enumerate_states(&c4, ProcessKind::RwK, 3, 100).unwrap().len(), 64);
    for kind in [ProcessKind::Rw, ProcessKind::RwK, ProcessKind::ExK, ProcessKind::IpK] {
        let k = if kind == ProcessKind::Rw { 1 } else { 2 };
        let s = StateSpace::enumerate(5, kind, k, 1000).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.index_of(&s.state_vec(i)), Some(i));
        }
    }
}

#[test]
fn generator_examples() {
    let k2 = build_generator(&gen("complete:2"), ProcessKind::Rw, 1, 10).unwrap();
    assert_eq!(k2.generator.rate(0, 1), 1.0);
    assert_eq!(k2.generator.rate(1, 0), 1.0);
    assert_eq!(k2.generator.diag(), &[-1.0, -1.0]);
    let p3 = gen("path:3");
    let rw = build_generator(&p3, ProcessKind::Rw, 1, 10).unwrap().generator.to_dense();
    let ex = build_generator(&p3, ProcessKind::ExK, 1, 10).unwrap().generator.to_dense();
    assert_eq!(rw, ex);
    assert_eq!(rw, oracle::walk_generator(&p3));
    let ip = build_generator(&gen("cycle:4"), ProcessKind::IpK, 2, 100).unwrap();
    let q = ip.generator.to_dense();
    for i in 0..12 {
        assert!(q.row(i).sum().abs() < 1e-15);
        for j in 0..12 {
            assert_eq!(q[(i, j)], q[(j, i)]);
        }
    }
}

#[test]
fn transition_examples() {
    let k2 = build_generator(&gen("complete:2"), ProcessKind::Rw, 1, 10).unwrap();
    let p = transition_distribution(&k2, &[0], 0.0, DEFAULT_TOL).unwrap();
    assert_eq!(p.probs(), &[1.0, 0.0]);
    let p = transition_distribution(&k2, &[0], 2f64.ln() / 2.0, DEFAULT_TOL).unwrap();
    assert!((p.probs()[0] - 0.75).abs() < 1e-12);
    assert!((worst_case_distance(&k2, 2f64.ln() / 2.0) - 0.25).abs() < 1e-12);
    assert!(transition_distribution(&k2, &[0], 1.0, 1e-3).is_err());
    let k4 = build_generator(&gen("complete:4"), ProcessKind::Rw, 1, 10).unwrap();
    let p = transition_distribution(&k4, &[2], 0.25, DEFAULT_TOL).unwrap();
    for y in 0..4 {
        let d = if y == 2 { 1.0 } else { 0.0 };
        assert!((p.probs()[y] - (0.25 + (d - 0.25) * (-1.0f64).exp())).abs() < 1e-12);
    }
}

#[test]
fn tv_examples() {
    let space = Arc::new(StateSpace::enumerate(4, ProcessKind::Rw, 1, 10).unwrap());
    let u = DiscreteDistribution::uniform(Arc::clone(&space));
    let d = DiscreteDistribution::point_mass(Arc::clone(&space), 2);
    assert_eq!(tv_distance(&d, &u).unwrap(), 0.75);
    assert_eq!(tv_distance(&u, &u).unwrap(), 0.0);
    assert!(DiscreteDistribution::new(Arc::clone(&space), vec![0.5, 0.5, 0.1, -0.1]).is_err());
    assert!(DiscreteDistribution::new(space, vec![0.5, 0.5, 0.1, 0.0]).is_err());
}

#[test]
fn worst_case_distance_is_monotone() {
    let c = build_generator(&gen("cycle:4"), ProcessKind::ExK, 2, 100).unwrap();
    assert!((worst_case_distance(&c, 0.0) - (1.0 - 1.0 / 6.0)).abs() < 1e-15);
    let curve: Vec<f64> = (0..=50).map(|i| worst_case_distance(&c, 0.1 * i as f64)).collect();
    assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-14));
}

#[test]
fn probabilities_are_bounded_below_after_two_mixing_times() {
    let c4 = gen("cycle:4");
    for (kind, k) in [(ProcessKind::Rw, 1), (ProcessKind::ExK, 2)] {
        let c = build_generator(&c4, kind, k, 100).unwrap();
        for eps in [0.1, 0.2] {
            let t = 2.0 * mixing_time(&c, eps, 1e-9).unwrap();
            let floor = (1.0 - 2.0 * eps).powi(2) / c.len() as f64;
            for i in 0..c.len() {
                let row = exact::transition_from_index(&c, i, t, DEFAULT_TOL).unwrap();
                assert!(row.probs().iter().all(|&p| p >= floor - 1e-12));
            }
        }
    }
}

#[test]
fn exclusion_mixes_no_slower_than_interchange() {
    for spec in ["path:4", "cycle:4", "cycle:5", "complete:4", "torus:2:2"] {
        let g = gen(spec);
        for k in 1..g.n() {
            let ex = build_generator(&g, ProcessKind::ExK, k, 1000).unwrap();
            let ip = build_generator(&g, ProcessKind::IpK, k, 1000).unwrap();
            let (a, b) = (mixing_time(&ex, 0.25, 1e-9).unwrap(), mixing_time(&ip, 0.25, 1e-9).unwrap());
            assert!(a <= b + 1e-8, "{spec} k={k}: {a} > {b}");
        }
    }
}

#[test]
fn exclusion_particle_hole_duality() {
    for spec in ["path:5", "cycle:6", "torus:2:3"] {
        let g = gen(spec);
        let n = g.n();
        for k in 1..n {
            let a = build_generator(&g, ProcessKind::ExK, k, 1000).unwrap();
            let b = build_generator(&g, ProcessKind::ExK, n - k, 1000).unwrap();
            for t in [0.05, 0.4, 1.5] {
                assert!((worst_case_distance(&a, t) - worst_case_distance(&b, t)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn negative_correlation_examples() {
    let c6 = gen("cycle:6");
    let r = negative_correlation_report(&c6, 1, &[2], 0.5, 100).unwrap();
    assert!(r.max_violation < 0.0);
    let r = negative_correlation_report(&c6, 3, &[0, 1, 2], 0.5, 100).unwrap();
    assert!(r.max_violation <= 1e-12);
    let c4 = gen("cycle:4");
    for t in [0.1, 1.0, 10.0] {
        assert!(negative_correlation_report(&c4, 2, &[0, 2], t, 100).unwrap().max_violation <= 1e-12);
    }
}

fn law3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 3).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

proptest! {
    #[test]
    fn tv_forms_agree_and_tensorize(m1 in law3(), m2 in law3(), n1 in law3(), n2 in law3()) {
        // half L1 equals the max over the 8 subsets
        let half_l1 = 0.5 * m1.iter().zip(&n1).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let best = (0u8..8)
            .map(|mask| (0..3).filter(|i| mask >> i & 1 == 1).map(|i| m1[i] - n1[i]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((tv(&m1, &n1) - half_l1).abs() < 1e-14);
        prop_assert!((tv(&m1, &n1) - best).abs() < 1e-14);
        let lhs = tv(&product(&m1, &m2), &product(&n1, &n2));
        prop_assert!(lhs <= tv(&m1, &n1) + tv(&m2, &n2) + 1e-14);
    }

    #[test]
    fn uniformization_matches_expm_on_random_weights(w in prop::collection::vec(0.1f64..3.0, 5), t in 0.0f64..4.0) {
        let g = WeightedGraph::new(4, &[(0, 1, w[0]), (1, 2, w[1]), (2, 3, w[2]), (3, 0, w[3]), (1, 3, w[4])]).unwrap();
        for (kind, k) in [(ProcessKind::Rw, 1), (ProcessKind::ExK, 2), (ProcessKind::IpK, 2)] {
            let c = build_generator(&g, kind, k, 100).unwrap();
            let dense = oracle::expm(&(c.generator.to_dense() * t));
            for i in 0..c.len() {
                let row = exact::transition_from_index(&c, i, t, DEFAULT_TOL).unwrap();
                for j in 0..c.len() {
                    prop_assert!((row.probs()[j] - dense[(i, j)]).abs() < 1e-9);
                }
            }
        }
    }
}
