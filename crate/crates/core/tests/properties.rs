use portfolio_bo::acquisition::{ei_utility, lcb_utility, pi_utility, AcquisitionSpec};
use portfolio_bo::gp::{Dataset, GpHyperparams, GpModel};
use portfolio_bo::portfolio::{normalize_rewards, selection_probabilities, PortfolioState};
use portfolio_bo::SearchSpace;
use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

fn non_degenerate(v: &[f64]) -> bool {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo > 1e-6 * (1.0 + hi.abs().max(lo.abs()))
}

#[test]
fn normalized_rewards_span_minus_one_to_zero() {
    let mut rng = SmallRng::seed_from_u64(11);
    for _ in 0..10_000 {
        let j = rng.gen_range(2..=9);
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let g: Vec<f64> = (0..j).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
        let r = normalize_rewards(&g);
        assert!(r.iter().all(|v| (-1.0..=0.0).contains(v)), "{g:?} -> {r:?}");
        if non_degenerate(&g) {
            assert!(r.iter().any(|&v| v == 0.0));
            assert!(r.iter().any(|&v| v == -1.0));
        }
    }
}

#[test]
fn probabilities_do_not_touch_raw_rewards() {
    let specs = vec![
        AcquisitionSpec::pi(0.01).unwrap(),
        AcquisitionSpec::ei(0.01).unwrap(),
        AcquisitionSpec::lcb(0.2, 0.1).unwrap(),
    ];
    let mut state = PortfolioState::no_past_bo(specs, 4.0, 0.7).unwrap();
    state.update_rewards(&[0.3, -1.2, 5.0]).unwrap();
    let before = state.rewards().to_vec();
    let p = state.probabilities();
    let _ = state.normalized_rewards();
    assert_eq!(state.rewards(), &before[..]);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // spread is exactly exp(-eta) between worst and best
    let (lo, hi) = p.iter().fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!((lo / hi - (-4.0f64).exp()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn normalization_is_affine_invariant(
        g in prop::collection::vec(-100.0f64..100.0, 2..10),
        a in 0.01f64..100.0,
        b in -1e3f64..1e3,
    ) {
        prop_assume!(non_degenerate(&g));
        let shifted: Vec<f64> = g.iter().map(|v| a * v + b).collect();
        prop_assume!(non_degenerate(&shifted));
        for (x, y) in normalize_rewards(&g).iter().zip(normalize_rewards(&shifted)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_sums_to_one(
        s in prop::collection::vec(-1e3f64..1e3, 1..12),
        eta in 0.01f64..50.0,
    ) {
        let p = selection_probabilities(&s, eta);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn ei_and_pi_ranges(mean in -10.0f64..10.0, var in 0.0f64..25.0, mu in -10.0f64..10.0, xi in 0.0f64..2.0) {
        let ei = ei_utility(mean, var, mu, xi);
        let pi = pi_utility(mean, var, mu, xi);
        prop_assert!(ei >= 0.0);
        prop_assert!((0.0..=1.0).contains(&pi));
    }

    #[test]
    fn ei_and_pi_nondecreasing_in_sigma_below_target(tau in -5.0f64..=0.0, mu in -3.0f64..3.0) {
        // tau = mu - xi - mean <= 0
        let xi = 0.01;
        let mean = mu - xi - tau;
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for k in 0..200 {
            let sigma = 1e-3 + k as f64 * 0.05;
            let v = sigma * sigma;
            let cur = (ei_utility(mean, v, mu, xi), pi_utility(mean, v, mu, xi));
            prop_assert!(cur.0 >= prev.0 - 1e-12 && cur.1 >= prev.1 - 1e-12);
            prev = cur;
        }
    }

    #[test]
    fn lcb_argmax_survives_constant_shift(
        cands in prop::collection::vec((-5.0f64..5.0, 0.0f64..4.0), 2..40),
        shift in -100.0f64..100.0,
        t in 1usize..100,
    ) {
        let argmax = |c: f64| {
            let mut best = (0, f64::NEG_INFINITY);
            for (i, (m, v)) in cands.iter().enumerate() {
                let u = lcb_utility(*m + c, *v, t, 3, 0.2, 0.1);
                if u > best.1 {
                    best = (i, u);
                }
            }
            best.0
        };
        prop_assert_eq!(argmax(0.0), argmax(shift));
    }

    #[test]
    fn prediction_ignores_row_order(seed in 0u64..1000) {
        let mut rng = SmallRng::seed_from_u64(seed);
        let d = 3;
        let n = rng.gen_range(2..15);
        let space = SearchSpace::new(vec![-1.0; d], vec![2.0; d]).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..2.0)).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let rows_p: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
        let ys_p: Vec<f64> = order.iter().map(|&i| ys[i]).collect();
        let hyper = GpHyperparams::new(&[0.4, 0.7, 0.2], 1.3, 1e-3).unwrap();
        let a = GpModel::with_hyperparams(&space, &Dataset::from_rows(&rows, &ys).unwrap(), hyper.clone()).unwrap();
        let b = GpModel::with_hyperparams(&space, &Dataset::from_rows(&rows_p, &ys_p).unwrap(), hyper).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let (ma, va) = a.predict(&x).unwrap();
            let (mb, vb) = b.predict(&x).unwrap();
            prop_assert!((ma - mb).abs() < 1e-10, "{} vs {}", ma, mb);
            prop_assert!((va - vb).abs() < 1e-10, "{} vs {}", va, vb);
        }
    }
}
