#![allow(dead_code)]

use rand::Rng;
use sphmm_core::hmm::{build_topology, logsumexp, Gmm, Hmm, Order, TopologyKind, TopologySpec};

/// Random probabilities on the allowed entries of each group.
pub fn randomize_groups(p: &mut [f64], mask: &[bool], group: usize, rng: &mut impl Rng) {
    for (pg, mg) in p.chunks_mut(group).zip(mask.chunks(group)) {
        let draws: Vec<f64> = mg.iter().map(|&m| if m { rng.random_range(0.05..1.0) } else { 0.0 }).collect();
        let total: f64 = draws.iter().sum();
        for (v, d) in pg.iter_mut().zip(draws) {
            *v = if total > 0.0 { d / total } else { 0.0 };
        }
    }
}

pub fn random_gmm(dim: usize, components: usize, rng: &mut impl Rng) -> Gmm {
    let mut weights: Vec<f64> = (0..components).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Gmm {
        weights,
        means: (0..components).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect(),
        variances: (0..components).map(|_| (0..dim).map(|_| rng.random_range(0.3..2.0)).collect()).collect(),
    }
}

pub fn random_hmm(kind: TopologyKind, order: Order, n: usize, dim: usize, rng: &mut impl Rng) -> Hmm {
    let spec = TopologySpec::new(kind, order, n).unwrap();
    let mut t = build_topology(&spec).unwrap();
    randomize_groups(&mut t.initial, &t.initial_mask.clone(), n, rng);
    randomize_groups(&mut t.first, &t.first_mask.clone(), n, rng);
    if order == Order::Second {
        randomize_groups(&mut t.second, &t.second_mask.clone(), n, rng);
    }
    let emissions = (0..n).map(|_| random_gmm(dim, rng.random_range(1..=2), rng)).collect();
    Hmm::new(spec, t, emissions, 1e-4).unwrap()
}

pub fn random_obs(len: usize, dim: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..len).map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()
}

/// Joint log-probability of one explicit state path, straight from the
/// parameter tables.
pub fn path_log_prob(hmm: &Hmm, path: &[usize], obs: &[Vec<f64>]) -> f64 {
    let t = &hmm.transitions;
    let mut lp = t.initial[path[0]].ln() + hmm.emissions[path[0]].log_density(&obs[0]);
    for step in 1..path.len() {
        let trans = if step == 1 || t.order == Order::First {
            t.a(path[step - 1], path[step])
        } else {
            t.a3(path[step - 2], path[step - 1], path[step])
        };
        lp += trans.ln() + hmm.emissions[path[step]].log_density(&obs[step]);
    }
    lp
}

/// Every state sequence of length `len` over `n` states.
pub fn all_paths(n: usize, len: usize) -> Vec<Vec<usize>> {
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut p = vec![0; len];
            for slot in p.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            p
        })
        .collect()
}

/// Exhaustive-enumeration log-likelihood.
pub fn brute_force_log_likelihood(hmm: &Hmm, obs: &[Vec<f64>]) -> f64 {
    let scores: Vec<f64> = all_paths(hmm.num_states(), obs.len())
        .iter()
        .map(|p| path_log_prob(hmm, p, obs))
        .collect();
    logsumexp(&scores)
}

/// Exhaustive-enumeration best path score.
pub fn brute_force_best(hmm: &Hmm, obs: &[Vec<f64>]) -> f64 {
    all_paths(hmm.num_states(), obs.len())
        .iter()
        .map(|p| path_log_prob(hmm, p, obs))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Copies a first-order model into a second-order one with `a_ijk = a_jk`.
pub fn lift_to_second_order(hmm: &Hmm) -> Hmm {
    let n = hmm.num_states();
    let spec = TopologySpec::new(hmm.topology.kind, Order::Second, n).unwrap();
    let mut t = build_topology(&spec).unwrap();
    t.initial = hmm.transitions.initial.clone();
    t.first = hmm.transitions.first.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = (i * n + j) * n + k;
                t.second[idx] = if t.second_mask[idx] { hmm.transitions.a(j, k) } else { 0.0 };
            }
        }
    }
    Hmm::new(spec, t, hmm.emissions.clone(), hmm.var_floor.clone()).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
