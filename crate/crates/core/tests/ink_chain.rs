use excl_core::ink;
use excl_core::par;
use proptest::prelude::*;

#[test]
fn one_step_contraction_for_every_state() {
    let worst = par::map_trials(999, |i| ink::worst_one_step_ratio(i as u64 + 2).unwrap())
        .into_iter()
        .fold(0.0f64, f64::max);
    assert!(worst <= 71.0 / 72.0, "{worst}");
}

#[test]
fn decay_profile_is_monotone_and_bounded() {
    for m in [2u64, 3, 17, 100, 640] {
        let p = ink::conditioned_decay_profile(m, 300).unwrap();
        assert!(p.decay.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(p.worst_bound_excess() <= 0.0);
        assert!(p.worst_contraction_excess() <= 1e-12);
    }
}

#[test]
fn expected_absorption_at_the_top_from_simulation() {
    let trials = 20_000;
    let m = 7;
    let mut hits = 0;
    for i in 0..trials {
        let mut r = excl_core::rng::substream(99, i);
        hits += usize::from(ink::simulate_ink(m, &mut r, 100_000).unwrap().absorbed_at == m);
    }
    let p = hits as f64 / trials as f64;
    let sigma = ((1.0 / 7.0) * (6.0 / 7.0) / trials as f64).sqrt();
    assert!((p - 1.0 / 7.0).abs() <= 3.0 * sigma);
}

proptest! {
    #[test]
    fn kernel_rows_are_martingale_and_stochastic(m in 1u64..2000, a in 0u64..2000) {
        let a = a % (m + 1);
        let row = ink::step_kernel(a, m).unwrap();
        let mean: f64 = row.iter().map(|&(b, p)| b as f64 * p).sum();
        prop_assert_eq!(mean, a as f64);
        prop_assert!(row.iter().all(|&(b, _)| b <= m));
        if a > 0 {
            let q = ink::conditioned_kernel_exact(a, m).unwrap();
            let total: num_rational::Ratio<u64> = q.iter().map(|&(_, p)| p).sum();
            prop_assert_eq!(total, num_rational::Ratio::from_integer(1));
        }
    }

    #[test]
    fn delta_keeps_the_walk_inside(m in 1u64..5000, a in 0u64..5000) {
        let a = a % (m + 1);
        let d = ink::delta(a, m).unwrap();
        prop_assert!(d <= a && a + d <= m);
        prop_assert_eq!(d == 0, a == 0 || a == m);
    }

    #[test]
    fn simulated_paths_move_by_delta(m in 2u64..300, seed in any::<u64>()) {
        let mut r = excl_core::rng::from_seed(seed);
        let p = ink::simulate_ink(m, &mut r, 1_000_000).unwrap();
        prop_assert!(p.absorbed_at == 0 || p.absorbed_at == m);
        for w in p.path.windows(2) {
            prop_assert_eq!(w[0].abs_diff(w[1]), ink::delta(w[0], m).unwrap());
        }
    }
}
