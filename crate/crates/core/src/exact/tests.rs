use super::lumped::LumpedChain;
use super::*;
use crate::graph::GraphKind;
use crate::oracle;

fn gen(spec: &str) -> WeightedGraph {
    WeightedGraph::generate(&GraphKind::parse(spec).unwrap(), 0).unwrap()
}

#[test]
fn enumeration_sizes_and_order() {
    let s = StateSpace::enumerate(5, ProcessKind::ExK, 2, 1000).unwrap();
    assert_eq!(s.len(), 10);
    assert_eq!(s.state(0), &[0, 1]);
    assert_eq!(s.state(9), &[3, 4]);
    let s = StateSpace::enumerate(4, ProcessKind::IpK, 2, 1000).unwrap();
    assert_eq!(s.len(), 12);
    assert_eq!(s.state(1), &[0, 2]);
    let s = StateSpace::enumerate(3, ProcessKind::RwK, 2, 1000).unwrap();
    assert_eq!(s.len(), 9);
    assert_eq!(s.state(5), &[1, 2]);
    assert_eq!(s.index_of(&[1, 2]), Some(5));
    let s = StateSpace::enumerate(6, ProcessKind::ExK, 3, 1000).unwrap();
    assert_eq!(s.index_of(&[5, 0, 3]), s.index_of(&[0, 3, 5]));
}

#[test]
fn enumeration_respects_cap() {
    let err = StateSpace::enumerate(30, ProcessKind::IpK, 6, 1000).unwrap_err();
    assert!(matches!(err, Error::StateSpaceTooLarge { .. }));
}

#[test]
fn generators_are_conservative_and_symmetric() {
    let g = gen("cycle:5");
    for (kind, k) in [(ProcessKind::Rw, 1), (ProcessKind::RwK, 2), (ProcessKind::ExK, 2), (ProcessKind::IpK, 3)] {
        let c = build_generator(&g, kind, k, 10_000).unwrap();
        assert!(c.generator.is_symmetric(0.0), "{kind:?}");
        for i in 0..c.len() {
            let out: f64 = c.generator.row(i).map(|(_, r)| r).sum();
            assert!((out + c.generator.diag()[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn uniformization_matches_dense_exponential() {
    let g = WeightedGraph::new(4, &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (3, 0, 1.5), (0, 2, 0.25)]).unwrap();
    for (kind, k) in [(ProcessKind::Rw, 1), (ProcessKind::ExK, 2), (ProcessKind::IpK, 2)] {
        let c = build_generator(&g, kind, k, 100).unwrap();
        let q = c.generator.to_dense();
        for t in [0.05, 0.7, 3.0] {
            let dense = oracle::expm(&(&q * t));
            for i in 0..c.len() {
                let row = transition_from_index(&c, i, t, 1e-14).unwrap();
                for j in 0..c.len() {
                    assert!((row.probs()[j] - dense[(i, j)]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn complete_graph_mixing_times() {
    let k2 = gen("complete:2");
    let c = build_generator(&k2, ProcessKind::Rw, 1, 100).unwrap();
    let t = mixing_time(&c, 0.25, 1e-9).unwrap();
    assert!((t - 2f64.ln() / 2.0).abs() < 1e-8);
    let k4 = gen("complete:4");
    let c = build_generator(&k4, ProcessKind::Rw, 1, 100).unwrap();
    let t = mixing_time(&c, 0.25, 1e-9).unwrap();
    assert!((t - 3f64.ln() / 4.0).abs() < 1e-8);
    // the uniformization profile agrees with the spectral one
    let t2 = mixing_time_of(&UniformizationProfile(&c), 0.25, 1e-9).unwrap();
    assert!((t - t2).abs() < 1e-8);
}

#[test]
fn tv_rejects_mismatched_spaces() {
    let a = Arc::new(StateSpace::enumerate(4, ProcessKind::ExK, 2, 100).unwrap());
    let b = Arc::new(StateSpace::enumerate(4, ProcessKind::IpK, 2, 100).unwrap());
    let p = DiscreteDistribution::uniform(a);
    let q = DiscreteDistribution::uniform(b);
    assert!(matches!(tv_distance(&p, &q), Err(Error::SpaceMismatch)));
    assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
}

#[test]
fn meeting_tail_on_two_vertices() {
    let g = gen("complete:2");
    for t in [0.0, 0.3, 1.0, 4.0] {
        let p = meeting_time_tail(&g, (0, 1), t).unwrap();
        assert!((p - (-2.0 * t).exp()).abs() < 1e-12);
    }
    assert_eq!(meeting_time_tail(&g, (1, 1), 0.5).unwrap(), 0.0);
}

#[test]
fn meeting_tail_spectral_matches_uniformization() {
    let g = gen("cycle:6");
    let m = MeetingChain::new(&g);
    let all = m.all_tails(1.3).unwrap();
    for a in 0..6 {
        for b in 0..6 {
            if a != b {
                assert!((all[a * 6 + b] - m.tail(a, b, 1.3)).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn exclusion_is_negatively_correlated_on_small_cycle() {
    let g = gen("cycle:6");
    for t in [0.1, 1.0] {
        let r = negative_correlation_report(&g, 3, &[0, 1, 2], t, 1000).unwrap();
        assert!(r.max_violation <= 1e-12, "{r:?}");
    }
}

#[test]
fn lumped_interchange_matches_full_chain() {
    for n in [5, 6] {
        let lumped = LumpedChain::complete_ip2(n, 1000).unwrap();
        assert_eq!(lumped.num_classes(), 7);
        let full = build_generator(&gen(&format!("complete:{n}")), ProcessKind::IpK, 2, 1000).unwrap();
        let a = lumped.mixing_time(0.25, 1e-9).unwrap();
        let b = mixing_time(&full, 0.25, 1e-9).unwrap();
        assert!((a - b).abs() < 1e-7, "n = {n}: {a} vs {b}");
    }
}

#[test]
fn lumping_detects_bad_partition() {
    let g = gen("path:4");
    // vertex 0 and 1 play different roles on a path
    let r = lumped::LumpedChain::new(&g, ProcessKind::Rw, &[0], |s| u64::from(s[0] < 2), 100);
    assert!(r.is_err());
}
