//! Statistical and structural properties of the simulator and schedulers.

use chanshare::bounds::{lower_bound_throughput, optimal_transmit_prob};
use chanshare::model::{Action, ArrivalKind, NetworkConfig, NetworkTopology, Rate, TernaryFeedback};
use chanshare::policies::{
    gate_decide, schedule_lqf, schedule_priority, schedule_randomized, ChannelGateState,
    PolicyKind, RhoMatrix,
};
use chanshare::sim::{estimate_saturated_throughput, run_simulation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rate(v: f64) -> Rate {
    Rate::new(v).unwrap()
}

#[test]
fn legacy_queue_rate_stable_under_optimal_gate() {
    // Q_u(T)/T vanishes under the back-off gate at the optimal transmit
    // probability, even at high legacy utilization.
    for l in [0.5, 0.9] {
        let p = optimal_transmit_prob(rate(l));
        let config = NetworkConfig {
            adaptive_rates: vec![Rate::ZERO],
            uncoop_rates: vec![rate(l)],
            horizon: 2_000_000,
            seed: 17,
            adaptive_arrival_kind: ArrivalKind::Bernoulli,
            topology: NetworkTopology {
                num_adaptive: 1,
                num_channels: 1,
                access_sets: vec![vec![1]],
            },
        };
        let metrics = chanshare::sim::run_simulation_with(
            &config,
            PolicyKind::PiLb,
            &[p],
            2_000_000,
            17,
            1_000_000,
        )
        .unwrap();
        let qt = metrics.uncoop_qt_over_t()[0];
        assert!(qt <= 1e-3, "lambda={l}: Q_u(T)/T = {qt}");
    }
}

#[test]
fn monte_carlo_agrees_with_chain_analysis() {
    for (l, seed) in [(0.3, 1u64), (0.5, 2), (0.7, 3)] {
        let p = optimal_transmit_prob(rate(l));
        let estimate = estimate_saturated_throughput(rate(l), p, 2_000_000, seed).unwrap();
        let exact = lower_bound_throughput(rate(l));
        assert!(
            (estimate - exact).abs() < 0.005,
            "lambda={l}: estimate {estimate} vs exact {exact}"
        );
    }
}

#[test]
fn randomized_marginals_match_rho_ratios() {
    // Chi-squared goodness of fit at 1e5 samples, three users with weights
    // 0.2 / 0.3 / 0.5; critical value for 2 dof at alpha = 0.001.
    let mut rho = RhoMatrix::zeros(3, 1);
    rho.set(0, 0, 0.2);
    rho.set(1, 0, 0.3);
    rho.set(2, 0, 0.5);
    let expected = [0.2, 0.3, 0.5];
    let draws = 100_000u64;
    let mut counts = [0u64; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..draws {
        let a = schedule_randomized(&rho, &[true], &mut rng);
        counts[a.channel_user[0].unwrap()] += 1;
    }
    let chi2: f64 = (0..3)
        .map(|i| {
            let e = expected[i] * draws as f64;
            let d = counts[i] as f64 - e;
            d * d / e
        })
        .sum();
    assert!(chi2 < 13.816, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn lqf_and_priority_crossover_on_restricted_user() {
    // A user confined to one channel starves under fixed priority while LQF
    // keeps it served; both run on the same arrivals.
    let config = NetworkConfig {
        adaptive_rates: vec![rate(0.28); 4],
        uncoop_rates: vec![rate(0.2); 2],
        horizon: 200_000,
        seed: 5,
        adaptive_arrival_kind: ArrivalKind::Bernoulli,
        topology: NetworkTopology {
            num_adaptive: 4,
            num_channels: 2,
            access_sets: vec![vec![1, 2], vec![1, 2], vec![1, 2], vec![2]],
        },
    };
    let lqf = run_simulation(&config, PolicyKind::Lqf, 200_000, 5).unwrap();
    let pri = run_simulation(&config, PolicyKind::Priority, 200_000, 5).unwrap();
    let lqf_max = lqf
        .adaptive_qt_over_t()
        .into_iter()
        .fold(0.0f64, f64::max);
    let pri_max = pri
        .adaptive_qt_over_t()
        .into_iter()
        .fold(0.0f64, f64::max);
    assert!(lqf_max < 0.01, "LQF backlog rate {lqf_max}");
    assert!(pri_max > 10.0 * lqf_max, "priority {pri_max} vs LQF {lqf_max}");
}

#[test]
fn randomized_policy_stabilizes_feasible_demand() {
    let config = NetworkConfig {
        adaptive_rates: vec![rate(0.25); 4],
        uncoop_rates: vec![rate(0.2); 2],
        horizon: 500_000,
        seed: 9,
        adaptive_arrival_kind: ArrivalKind::Bernoulli,
        topology: NetworkTopology {
            num_adaptive: 4,
            num_channels: 2,
            access_sets: vec![vec![1, 2], vec![1, 2], vec![1, 2], vec![2]],
        },
    };
    let metrics = run_simulation(&config, PolicyKind::Randomized, 500_000, 9).unwrap();
    let max_qt = metrics
        .adaptive_qt_over_t()
        .into_iter()
        .fold(0.0f64, f64::max);
    assert!(max_qt < 0.01, "max Q(T)/T = {max_qt}");
}

fn arb_topology() -> impl Strategy<Value = NetworkTopology> {
    (1usize..=5, 1usize..=4).prop_flat_map(|(n, m)| {
        proptest::collection::vec(proptest::collection::vec(1usize..=m, 1..=m), n).prop_map(
            move |mut sets| {
                for set in &mut sets {
                    set.sort_unstable();
                    set.dedup();
                }
                NetworkTopology {
                    num_adaptive: n,
                    num_channels: m,
                    access_sets: sets,
                }
            },
        )
    })
}

proptest! {
    #[test]
    fn schedulers_respect_topology_and_gates(
        topo in arb_topology(),
        queue_seed in 0u64..1000,
        gate_mask in 0u32..16,
        rng_seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(queue_seed);
        use rand::Rng as _;
        let queues: Vec<u64> = (0..topo.num_adaptive).map(|_| rng.random_range(0..50)).collect();
        let gates: Vec<bool> = (0..topo.num_channels).map(|j| gate_mask & (1 << j) != 0).collect();

        let mut rho = RhoMatrix::zeros(topo.num_adaptive, topo.num_channels);
        for i in 0..topo.num_adaptive {
            for j in topo.channels_of(i) {
                rho.set(i, j, rng.random::<f64>());
            }
        }
        let mut sched_rng = ChaCha8Rng::seed_from_u64(rng_seed);

        let assignments = [
            schedule_lqf(&queues, &topo, &gates),
            schedule_priority(&queues, &topo, &gates),
            schedule_randomized(&rho, &gates, &mut sched_rng),
        ];
        for a in &assignments {
            for (j, user) in a.channel_user.iter().enumerate() {
                if let Some(i) = *user {
                    prop_assert!(gates[j], "assignment on closed gate {j}");
                    prop_assert!(topo.allows(i, j), "user {i} not allowed on channel {j}");
                }
            }
        }
    }

    #[test]
    fn lqf_choice_dominates_eligible_backlogs(
        topo in arb_topology(),
        queue_seed in 0u64..1000,
        gate_mask in 0u32..16,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(queue_seed);
        use rand::Rng as _;
        let queues: Vec<u64> = (0..topo.num_adaptive).map(|_| rng.random_range(0..50)).collect();
        let gates: Vec<bool> = (0..topo.num_channels).map(|j| gate_mask & (1 << j) != 0).collect();
        let a = schedule_lqf(&queues, &topo, &gates);
        for (j, user) in a.channel_user.iter().enumerate() {
            if let Some(i) = *user {
                for other in topo.eligible_users(j) {
                    prop_assert!(queues[i] >= queues[other]);
                }
            }
        }
    }

    #[test]
    fn priority_never_assigns_beyond_backlog(
        topo in arb_topology(),
        queue_seed in 0u64..1000,
        gate_mask in 0u32..16,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(queue_seed);
        use rand::Rng as _;
        let queues: Vec<u64> = (0..topo.num_adaptive).map(|_| rng.random_range(0..3)).collect();
        let gates: Vec<bool> = (0..topo.num_channels).map(|j| gate_mask & (1 << j) != 0).collect();
        let a = schedule_priority(&queues, &topo, &gates);
        let mut assigned = vec![0u64; topo.num_adaptive];
        for user in a.channel_user.iter().flatten() {
            assigned[*user] += 1;
        }
        for i in 0..topo.num_adaptive {
            prop_assert!(assigned[i] <= queues[i]);
        }
    }

    #[test]
    fn gate_never_transmits_after_collision(
        feedbacks in proptest::collection::vec(0u8..3, 1..200),
        p in 0.0f64..=1.0,
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = ChannelGateState::new(p);
        for f in feedbacks {
            let fb = match f {
                0 => TernaryFeedback::Success,
                1 => TernaryFeedback::Collision,
                _ => TernaryFeedback::Idle,
            };
            let (action, next) = gate_decide(&state, fb, &mut rng);
            if fb == TernaryFeedback::Collision {
                prop_assert_eq!(action, Action::NoTransmit);
                prop_assert!(next.backing_off);
            }
            state = next;
        }
    }
}
