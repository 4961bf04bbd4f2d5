use std::sync::Arc;

use excl_core::chameleon::{init_chameleon, ChameleonState, PinkeningRule};
use excl_core::estimators::{self, empirical_distribution, tv_upper_ci, Estimate, Method};
use excl_core::exact::{self, build_generator, DiscreteDistribution, ProcessKind, StateSpace, DEFAULT_TOL};
use excl_core::{par, rng, GraphKind, WeightedGraph};

fn gen(spec: &str) -> WeightedGraph {
    WeightedGraph::generate(&GraphKind::parse(spec).unwrap(), 0).unwrap()
}

fn within_3_sigma(est: &Estimate, exact: f64) -> bool {
    (est.value - exact).abs() <= 3.0 * est.sigma.max(1.0 / est.trials as f64)
}

#[test]
fn empirical_distribution_examples() {
    let space = Arc::new(StateSpace::enumerate(6, ProcessKind::Rw, 1, 10).unwrap());
    let one = empirical_distribution(&[4], Arc::clone(&space)).unwrap();
    assert_eq!(one.probs()[4], 1.0);
    let two = empirical_distribution(&[1, 3], Arc::clone(&space)).unwrap();
    assert_eq!((two.probs()[1], two.probs()[3]), (0.5, 0.5));
    assert!(empirical_distribution(&[6], Arc::clone(&space)).is_err());
    let n = 100_000;
    let samples = par::map_trials(n, |i| {
        use rand::Rng;
        rng::substream(1, i as u64).random_range(0..6)
    });
    let emp = empirical_distribution(&samples, Arc::clone(&space)).unwrap();
    let ci = tv_upper_ci(&emp, &DiscreteDistribution::uniform(space), n).unwrap();
    assert!(ci.value <= 3.0 * (6.0 / n as f64).sqrt());
}

#[test]
fn tv_ci_examples() {
    let space = Arc::new(StateSpace::enumerate(4, ProcessKind::Rw, 1, 10).unwrap());
    let u = DiscreteDistribution::uniform(Arc::clone(&space));
    let d = DiscreteDistribution::point_mass(Arc::clone(&space), 0);
    assert_eq!(tv_upper_ci(&u, &u, 10).unwrap().value, 0.0);
    assert_eq!(tv_upper_ci(&d, &u, 7).unwrap().value, 0.75);
    let other = Arc::new(StateSpace::enumerate(4, ProcessKind::ExK, 2, 10).unwrap());
    assert!(tv_upper_ci(&d, &DiscreteDistribution::uniform(other), 7).is_err());
    // C4 walker at t = 1 via the jump chain
    let c4 = gen("cycle:4");
    let chain = build_generator(&c4, ProcessKind::Rw, 1, 10).unwrap();
    let n = 100_000;
    let samples = par::map_trials(n, |i| {
        let mut r = rng::substream(2, i as u64);
        let mut v = 0usize;
        let mut t = 0.0;
        loop {
            use rand::Rng;
            t += -(1.0 - r.random::<f64>()).ln() / 2.0;
            if t > 1.0 {
                return v;
            }
            v = if r.random::<bool>() { (v + 1) % 4 } else { (v + 3) % 4 };
        }
    });
    let emp = empirical_distribution(&samples, Arc::clone(&chain.space)).unwrap();
    let exact = exact::transition_distribution(&chain, &[0], 1.0, DEFAULT_TOL).unwrap();
    let ci = tv_upper_ci(&emp, &exact, n).unwrap();
    assert!(ci.value <= 3.0 * ci.sigma);
}

#[test]
fn easy_verdicts() {
    let k2 = estimators::easy_verdict(&gen("complete:2"), Method::Exact, 0).unwrap();
    assert!(k2.easy);
    assert!(k2.sup_tail.value < 1e-300);
    assert!((k2.threshold_time - 20_000.0 * 2f64.ln() / 2.0).abs() < 1e-4);
    for spec in ["path:12", "cycle:15"] {
        assert!(estimators::easy_verdict(&gen(spec), Method::Exact, 0).unwrap().easy, "{spec}");
    }
    let mc = estimators::easy_verdict(&gen("cycle:5"), Method::MonteCarlo { trials: 200 }, 3).unwrap();
    assert!(mc.easy);
    assert!(estimators::easy_verdict(&gen("complete:60"), Method::Exact, 0).is_err());
}

#[test]
fn average_meeting_mass_examples() {
    let c6 = gen("cycle:6");
    let at0 = estimators::average_meeting_mass(&c6, 0.0, Method::Exact, 0).unwrap();
    assert!((at0.value - 1.0 / 6.0).abs() < 1e-15);
    let exact = estimators::average_meeting_mass(&c6, 1.0, Method::Exact, 0).unwrap();
    let mc = estimators::average_meeting_mass(&c6, 1.0, Method::MonteCarlo { trials: 100_000 }, 5).unwrap();
    assert!(within_3_sigma(&mc, exact.value), "{mc:?} vs {exact:?}");
    let p3 = gen("path:3");
    let exact = estimators::average_meeting_mass(&p3, 0.4, Method::Exact, 0).unwrap();
    let mc = estimators::average_meeting_mass(&p3, 0.4, Method::MonteCarlo { trials: 100_000 }, 6).unwrap();
    assert!(within_3_sigma(&mc, exact.value));
}

#[test]
fn symmetric_lemma_on_six_cycle() {
    let r = estimators::symmetric_lemma_check(&gen("cycle:6"), 2f64.powi(-10)).unwrap();
    assert!(r.max_lhs <= r.rhs, "{r:?}");
}

#[test]
fn red_decay_without_time_keeps_every_red() {
    let g = gen("cycle:8");
    let s0 = init_chameleon(&g, &[0, 1, 2]).unwrap();
    let r = estimators::red_decay_estimate(&g, &s0, 1e-12, PinkeningRule::NoPinkCap, None, 200, 1).unwrap();
    assert_eq!(r.estimate.value, s0.red.len() as f64);
    assert_eq!(r.estimate.sigma, 0.0);
    assert!(!r.violations.is_empty());
}

#[test]
fn single_red_on_large_complete_graph_pinkens() {
    let g = gen("complete:300");
    let s0 = ChameleonState::new(300, (0..149).collect(), vec![149], Vec::new(), (150..300).collect()).unwrap();
    let r = estimators::red_decay_estimate(&g, &s0, 1.0, PinkeningRule::NoPinkCap, None, 2_000, 2).unwrap();
    assert!(r.pinkening_rate.value >= 0.001 - 3.0 * r.pinkening_rate.sigma, "{r:?}");
}

#[test]
fn depinking_tail_on_three_path() {
    let g = gen("path:3");
    let s0 = init_chameleon(&g, &[0, 1]).unwrap();
    let exact = estimators::exact_depinking_tail_m2(&g, &s0, 0.5, 6).unwrap();
    let mc = estimators::depinking_tail(&g, &s0, 0.5, 6, 100_000, 9).unwrap();
    for (e, m) in exact.iter().zip(&mc.survival) {
        assert!(within_3_sigma(m, *e), "exact {e} vs {m:?}");
    }
    // with one red and one white vertex each round pinkens independently
    // given the survival so far, so the tail is close to geometric
    let ratio = exact[1] / exact[0];
    assert!(exact.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 0.05));
}
