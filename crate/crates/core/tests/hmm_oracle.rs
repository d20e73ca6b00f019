mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphmm_core::hmm::{build_topology, EmConfig, Gmm, Hmm, Order, TopologyKind, TopologySpec};

const KINDS: [TopologyKind; 2] = [TopologyKind::LeftToRight, TopologyKind::Circular];
const ORDERS: [Order; 2] = [Order::First, Order::Second];

#[test]
fn single_state_is_sum_of_emissions() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let hmm = random_hmm(TopologyKind::LeftToRight, Order::First, 1, 3, &mut rng);
    let obs = random_obs(3, 3, &mut rng);
    let direct: f64 = obs.iter().map(|o| hmm.emissions[0].log_density(o)).sum();
    let lp = hmm.forward_log_likelihood(&obs).unwrap();
    assert!(rel_err(lp, direct) < 1e-12);
}

#[test]
fn two_state_left_to_right_matches_enumeration() {
    let spec = TopologySpec::new(TopologyKind::LeftToRight, Order::First, 2).unwrap();
    let mut t = build_topology(&spec).unwrap();
    t.first = vec![0.7, 0.3, 0.0, 1.0];
    let emissions = vec![
        Gmm { weights: vec![1.0], means: vec![vec![0.0]], variances: vec![vec![1.0]] },
        Gmm { weights: vec![1.0], means: vec![vec![2.0]], variances: vec![vec![0.5]] },
    ];
    let hmm = Hmm::new(spec, t, emissions, 1e-4).unwrap();
    let obs = vec![vec![0.1], vec![1.5], vec![2.2]];
    let lp = hmm.forward_log_likelihood(&obs).unwrap();
    assert!(rel_err(lp, brute_force_log_likelihood(&hmm, &obs)) < 1e-12);
}

#[test]
fn forward_matches_enumeration_for_every_topology() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for kind in KINDS {
        for order in ORDERS {
            for _ in 0..25 {
                let n = rng.random_range(if kind == TopologyKind::Circular { 2 } else { 1 }..=4);
                let len = rng.random_range(1..=6);
                let hmm = random_hmm(kind, order, n, 2, &mut rng);
                let obs = random_obs(len, 2, &mut rng);
                let fast = hmm.forward_log_likelihood(&obs).unwrap();
                let slow = brute_force_log_likelihood(&hmm, &obs);
                assert!(rel_err(fast, slow) < 1e-10, "{kind:?} {order:?} n={n} T={len}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn viterbi_matches_enumeration_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for kind in KINDS {
        for order in ORDERS {
            for _ in 0..20 {
                let n = rng.random_range(2..=3);
                let len = rng.random_range(1..=6);
                let hmm = random_hmm(kind, order, n, 2, &mut rng);
                let obs = random_obs(len, 2, &mut rng);
                let al = hmm.viterbi_segment(&obs).unwrap();
                let best = brute_force_best(&hmm, &obs);
                assert!(rel_err(al.log_score, best) < 1e-10);
                // the path itself must score what Viterbi claims and respect the mask
                assert!(rel_err(path_log_prob(&hmm, &al.path, &obs), al.log_score) < 1e-10);
                assert!(al.log_score <= hmm.forward_log_likelihood(&obs).unwrap() + 1e-12);
            }
        }
    }
}

#[test]
fn viterbi_single_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let hmm = random_hmm(TopologyKind::LeftToRight, Order::First, 1, 2, &mut rng);
    let al = hmm.viterbi_segment(&random_obs(7, 2, &mut rng)).unwrap();
    assert_eq!(al.path, vec![0; 7]);
    assert_eq!(al.segments.len(), 1);
    assert_eq!((al.segments[0].start, al.segments[0].end), (0, 7));
}

#[test]
fn viterbi_finds_generation_switch() {
    let spec = TopologySpec::new(TopologyKind::LeftToRight, Order::First, 2).unwrap();
    let t = build_topology(&spec).unwrap();
    let g = |m: f64| Gmm { weights: vec![1.0], means: vec![vec![m, m]], variances: vec![vec![0.2, 0.2]] };
    let hmm = Hmm::new(spec, t, vec![g(-3.0), g(3.0)], 1e-4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for switch in [5usize, 12, 20] {
        let mut obs = Vec::new();
        for step in 0..30 {
            let state = usize::from(step >= switch);
            obs.push(hmm.emissions[state].means[0].iter().map(|m| m + 0.3 * rng.random_range(-1.0..1.0)).collect());
        }
        let al = hmm.viterbi_segment(&obs).unwrap();
        assert_eq!(al.segments.len(), 2);
        assert!((al.segments[1].start as i64 - switch as i64).abs() <= 1);
    }
}

#[test]
fn history_independent_second_order_equals_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in KINDS {
        for _ in 0..30 {
            let n = rng.random_range(2..=5);
            let first = random_hmm(kind, Order::First, n, 3, &mut rng);
            let second = lift_to_second_order(&first);
            let obs = random_obs(rng.random_range(1..=40), 3, &mut rng);
            let a = first.forward_log_likelihood(&obs).unwrap();
            let b = second.forward_log_likelihood(&obs).unwrap();
            assert!(rel_err(b, a) <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn long_sequences_do_not_underflow() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let hmm = random_hmm(TopologyKind::Circular, Order::Second, 4, 2, &mut rng);
    let obs = random_obs(10_000, 2, &mut rng);
    let lp = hmm.forward_log_likelihood(&obs).unwrap();
    assert!(lp.is_finite() && lp < 0.0);
}

#[test]
fn dimension_mismatch_and_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let hmm = random_hmm(TopologyKind::LeftToRight, Order::First, 2, 3, &mut rng);
    assert!(hmm.forward_log_likelihood(&[vec![0.0; 2]]).is_err());
    assert!(hmm.forward_log_likelihood(&[]).is_err());
}

#[test]
fn impossible_observation_is_negative_infinity() {
    let spec = TopologySpec::new(TopologyKind::LeftToRight, Order::First, 1).unwrap();
    let t = build_topology(&spec).unwrap();
    let g = Gmm { weights: vec![1.0], means: vec![vec![0.0]], variances: vec![vec![1e-4]] };
    let hmm = Hmm::new(spec, t, vec![g], 1e-4).unwrap();
    let lp = hmm.forward_log_likelihood(&[vec![1e200]]).unwrap();
    assert_eq!(lp, f64::NEG_INFINITY);
}

fn check_groups(hmm: &Hmm) {
    let t = &hmm.transitions;
    let n = hmm.num_states();
    let check = |p: &[f64], mask: &[bool]| {
        for (pg, mg) in p.chunks(n).zip(mask.chunks(n)) {
            for (v, m) in pg.iter().zip(mg) {
                if !m {
                    assert_eq!(*v, 0.0, "mass on a masked entry");
                }
            }
            if mg.iter().any(|&m| m) {
                assert!((pg.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            }
        }
    };
    check(&t.first, &t.first_mask);
    check(&t.second, &t.second_mask);
    check(&t.initial, &t.initial_mask);
}

#[test]
fn em_is_monotone_and_keeps_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for kind in KINDS {
        for order in ORDERS {
            let truth = random_hmm(kind, order, 4, 3, &mut rng);
            let data: Vec<Vec<Vec<f64>>> = (0..6).map(|_| truth.sample(25, &mut rng).1).collect();
            let refs: Vec<&[Vec<f64>]> = data.iter().map(|s| s.as_slice()).collect();
            let spec = TopologySpec::new(kind, order, 4).unwrap();
            let mut model = Hmm::initialize(spec, &refs, 2, 1e-4, 3).unwrap();
            let mut trace = Vec::new();
            // one iteration at a time to inspect the structure after each step
            for _ in 0..15 {
                let report = model.train_em(&refs, &EmConfig { max_iters: 1, rel_tol: 0.0 }).unwrap();
                check_groups(&model);
                model.validate().unwrap();
                trace.extend(report.trace);
            }
            let report = model.train_em(&refs, &EmConfig { max_iters: 30, rel_tol: 0.0 }).unwrap();
            for w in report.trace.windows(2).chain(trace.windows(2)) {
                assert!(w[1] >= w[0] - 1e-8, "{kind:?} {order:?}: {} -> {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn em_step_from_truth_does_not_decrease() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let truth = random_hmm(TopologyKind::Circular, Order::First, 3, 2, &mut rng);
    let data: Vec<Vec<Vec<f64>>> = (0..10).map(|_| truth.sample(30, &mut rng).1).collect();
    let refs: Vec<&[Vec<f64>]> = data.iter().map(|s| s.as_slice()).collect();
    let mut model = truth.clone();
    let report = model.train_em(&refs, &EmConfig { max_iters: 1, rel_tol: 0.0 }).unwrap();
    assert_eq!(report.trace.len(), 2);
    assert!(report.trace[1] - report.trace[0] >= -1e-8);
}

#[test]
fn em_recovers_known_transitions() {
    let spec = TopologySpec::new(TopologyKind::LeftToRight, Order::First, 2).unwrap();
    let mut t = build_topology(&spec).unwrap();
    t.first = vec![0.8, 0.2, 0.0, 1.0];
    let g = |m: f64| Gmm { weights: vec![1.0], means: vec![vec![m, -m]], variances: vec![vec![0.5, 0.5]] };
    let truth = Hmm::new(spec, t, vec![g(-2.0), g(2.0)], 1e-4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let data: Vec<Vec<Vec<f64>>> = (0..200).map(|_| truth.sample(20, &mut rng).1).collect();
    let refs: Vec<&[Vec<f64>]> = data.iter().map(|s| s.as_slice()).collect();
    let mut model = Hmm::initialize(spec, &refs, 1, 1e-4, 1).unwrap();
    model.train_em(&refs, &EmConfig { max_iters: 100, rel_tol: 1e-9 }).unwrap();
    assert!((model.transitions.a(0, 0) - 0.8).abs() < 0.05, "{}", model.transitions.a(0, 0));
    assert!((model.transitions.a(0, 1) - 0.2).abs() < 0.05);
    assert_eq!(model.transitions.a(1, 0), 0.0);
}

#[test]
fn zero_occupancy_state_is_reported() {
    // the third state can never be reached from a 1-frame sequence
    let spec = TopologySpec::new(TopologyKind::LeftToRight, Order::First, 3).unwrap();
    let data = [vec![vec![0.0]], vec![vec![0.5]]];
    let refs: Vec<&[Vec<f64>]> = data.iter().map(|s| s.as_slice()).collect();
    let mut model = Hmm::initialize(spec, &refs, 1, 1e-4, 1).unwrap();
    let before = model.emissions[2].clone();
    let report = model.train_em(&refs, &EmConfig { max_iters: 3, rel_tol: 0.0 }).unwrap();
    assert!(report.warnings.iter().any(|w| w.contains("state 3")));
    assert_eq!(model.emissions[2], before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn forward_enumeration_property(seed in any::<u64>(), circular in any::<bool>(), second in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if circular { TopologyKind::Circular } else { TopologyKind::LeftToRight };
        let order = if second { Order::Second } else { Order::First };
        let hmm = random_hmm(kind, order, rng.random_range(2..=4), 2, &mut rng);
        let obs = random_obs(rng.random_range(1..=5), 2, &mut rng);
        let fast = hmm.forward_log_likelihood(&obs).unwrap();
        prop_assert!(rel_err(fast, brute_force_log_likelihood(&hmm, &obs)) < 1e-10);
    }
}
