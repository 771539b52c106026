use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use siamstream::active::{bernoulli, BudgetMechanism, BudgetState, VariableThreshold};

const W: usize = 300;

#[test]
fn approximate_window_count_is_unbiased() {
    let windows = 10_000;
    let spacing = 10 * W;
    for (i, q) in [0.01, 0.05, 0.2].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + i as u64);
        let mut state = BudgetState::new(BudgetMechanism::WindowApprox, 1.0, W).unwrap();
        let mut step = 0;
        // burn-in of one spacing so the geometric sum has converged
        let mut samples = Vec::with_capacity(windows);
        for _ in 0..=windows {
            for _ in 0..spacing {
                state.record(step, bernoulli(&mut rng, q)).unwrap();
                step += 1;
            }
            samples.push(state.spending());
        }
        samples.remove(0);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        println!("q={q}: mean b_hat {mean:.6}, se {se:.2e}");
        assert!((mean - q).abs() <= 3.0 * se, "q={q}: mean {mean} se {se}");
    }
}

/// Greedy querier: asks for a label whenever the budget allows.
fn greedy_fraction(mech: BudgetMechanism, budget: f64, steps: u64) -> (Vec<u64>, u64) {
    let mut state = BudgetState::new(mech, budget, W).unwrap();
    let mut cumulative = Vec::with_capacity(steps as usize);
    for t in 0..steps {
        let q = state.within_budget();
        state.record(t, q).unwrap();
        cumulative.push(state.total_queried());
    }
    (cumulative, state.total_queried())
}

#[test]
fn greedy_querying_respects_slack_bound() {
    for mech in [
        BudgetMechanism::Exact,
        BudgetMechanism::WindowExact,
        BudgetMechanism::WindowApprox,
    ] {
        for b in [0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
            let (cum, _) = greedy_fraction(mech, b, 100 * W as u64);
            for (t, &u) in cum.iter().enumerate() {
                let t = (t + 1) as f64;
                assert!(
                    u as f64 / t <= b + W as f64 / t + 1e-12,
                    "{mech} B={b} t={t}: u={u}"
                );
            }
        }
    }
}

#[test]
fn long_run_fraction_within_five_percent() {
    let steps = 100 * W as u64;
    for mech in [BudgetMechanism::Exact, BudgetMechanism::WindowExact] {
        for b in [0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
            let (_, u) = greedy_fraction(mech, b, steps);
            assert!(u as f64 / steps as f64 <= 1.05 * b, "{mech} B={b}: {u}");
        }
    }
    // The faded count overshoots by about half a query per window, which is
    // within 5% only once B*w is large enough.
    for b in [0.05, 0.1, 0.2, 0.5, 1.0] {
        let (_, u) = greedy_fraction(BudgetMechanism::WindowApprox, b, steps);
        assert!(
            u as f64 / steps as f64 <= 1.05 * b,
            "window_approx B={b}: {u}"
        );
    }
    let (_, u) = greedy_fraction(BudgetMechanism::WindowApprox, 0.01, steps);
    let frac = u as f64 / steps as f64;
    assert!(
        frac > 1.05 * 0.01 && frac < 0.01 + 1.0 / W as f64,
        "B=0.01 overshoot {frac}"
    );
}

#[test]
fn zero_budget_never_queries_after_first_step() {
    for mech in [
        BudgetMechanism::Exact,
        BudgetMechanism::WindowExact,
        BudgetMechanism::WindowApprox,
    ] {
        let (_, u) = greedy_fraction(mech, 0.0, 5000);
        assert_eq!(u, 0);
    }
}

#[test]
fn faded_count_tends_to_window() {
    let mut state = BudgetState::new(BudgetMechanism::WindowApprox, 1.0, W).unwrap();
    for t in 0..20 * W as u64 {
        state.record(t, true).unwrap();
    }
    assert!((state.faded_count() - W as f64).abs() < 1e-6);
    assert!(state.spending() < 1.0);
}

#[test]
fn double_record_is_a_usage_error() {
    let mut state = BudgetState::new(BudgetMechanism::Exact, 0.5, W).unwrap();
    state.record(0, false).unwrap();
    assert!(matches!(
        state.record(0, true),
        Err(siamstream::Error::Usage(_))
    ));
}

#[test]
fn symmetric_noise_halves_queries_at_threshold() {
    let mut v = VariableThreshold::new(0.5, 1e-12, 1.0, ChaCha8Rng::seed_from_u64(9)).unwrap();
    let n = 100_000;
    let mut hits = 0;
    for _ in 0..n {
        let theta = v.theta();
        hits += usize::from(v.should_query(theta));
    }
    let freq = hits as f64 / n as f64;
    assert!(
        (freq - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt() + 1e-3,
        "{freq}"
    );
}

proptest! {
    #[test]
    fn threshold_moves_monotonically(theta0 in 0.01f64..1.0, s in 0.001f64..0.2, above in any::<bool>()) {
        let mut v = VariableThreshold::new(theta0, s, 0.0, ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut prev = v.theta();
        for _ in 0..200 {
            let criterion = if above { 1.0 } else { 0.0 };
            let q = v.should_query(criterion);
            prop_assert_eq!(q, !above);
            let now = v.theta();
            if above {
                prop_assert!(now >= prev && now <= 1.0);
            } else {
                prop_assert!(now <= prev && now >= siamstream::active::THETA_FLOOR);
            }
            prev = now;
        }
    }

    #[test]
    fn spending_stays_in_unit_interval(pattern in prop::collection::vec(any::<bool>(), 1..2000), w in 1usize..400) {
        for mech in [BudgetMechanism::Exact, BudgetMechanism::WindowExact, BudgetMechanism::WindowApprox] {
            let mut state = BudgetState::new(mech, 0.5, w).unwrap();
            for (t, &q) in pattern.iter().enumerate() {
                state.record(t as u64, q).unwrap();
                let b = state.spending();
                prop_assert!((0.0..=1.0).contains(&b));
                prop_assert!(state.total_queried() <= state.steps());
            }
        }
    }
}
