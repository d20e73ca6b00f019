//! First-order view of a transition model.
//!
//! A second-order chain over `N` states is run as a first-order chain over
//! expanded states: `N` start states (one per first state, used only at
//! `t = 0`) followed by every reachable pair `(previous, current)`. Each
//! expanded state emits with the density of its current base state, and each
//! expanded edge remembers which underlying parameter it uses so expected
//! counts can be folded back.

use crate::hmm::logsumexp;
use crate::hmm::topology::Order;
use crate::hmm::transitions::TransitionModel;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Edge {
    pub from: usize,
    pub to: usize,
    pub log_p: f64,
    /// Index into `first` (below `n*n`) or `second` (offset by `n*n`).
    pub param: usize,
}

pub(crate) struct Chain {
    /// Base state emitted by each expanded state.
    pub base: Vec<usize>,
    pub log_init: Vec<f64>,
    /// Edges sorted by destination, then source.
    pub edges: Vec<Edge>,
    /// `edges[in_start[s]..in_start[s + 1]]` enter expanded state `s`.
    pub in_start: Vec<usize>,
    /// Edge indices leaving each expanded state.
    pub out: Vec<Vec<usize>>,
}

impl Chain {
    pub fn new(t: &TransitionModel) -> Self {
        let n = t.num_states;
        let mut base = Vec::new();
        let mut log_init = Vec::new();
        let mut edges = Vec::new();
        match t.order {
            Order::First => {
                for i in 0..n {
                    base.push(i);
                    log_init.push(t.initial[i].ln());
                }
                for i in 0..n {
                    for j in 0..n {
                        if t.first_mask[i * n + j] {
                            edges.push(Edge {
                                from: i,
                                to: j,
                                log_p: t.first[i * n + j].ln(),
                                param: i * n + j,
                            });
                        }
                    }
                }
            }
            Order::Second => {
                for i in 0..n {
                    base.push(i);
                    log_init.push(t.initial[i].ln());
                }
                let mut pair_index = vec![usize::MAX; n * n];
                for i in 0..n {
                    for j in 0..n {
                        if t.first_mask[i * n + j] {
                            pair_index[i * n + j] = base.len();
                            base.push(j);
                            log_init.push(f64::NEG_INFINITY);
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let p = pair_index[i * n + j];
                        if p == usize::MAX {
                            continue;
                        }
                        edges.push(Edge {
                            from: i,
                            to: p,
                            log_p: t.first[i * n + j].ln(),
                            param: i * n + j,
                        });
                        for k in 0..n {
                            let idx = (i * n + j) * n + k;
                            if t.second_mask[idx] {
                                edges.push(Edge {
                                    from: p,
                                    to: pair_index[j * n + k],
                                    log_p: t.second[idx].ln(),
                                    param: n * n + idx,
                                });
                            }
                        }
                    }
                }
            }
        }
        edges.sort_by_key(|e| (e.to, e.from));
        let size = base.len();
        let mut in_start = vec![0; size + 1];
        for e in &edges {
            in_start[e.to + 1] += 1;
        }
        for s in 0..size {
            in_start[s + 1] += in_start[s];
        }
        let mut out = vec![Vec::new(); size];
        for (idx, e) in edges.iter().enumerate() {
            out[e.from].push(idx);
        }
        Self {
            base,
            log_init,
            edges,
            in_start,
            out,
        }
    }

    pub fn size(&self) -> usize {
        self.base.len()
    }

    fn incoming(&self, s: usize) -> &[Edge] {
        &self.edges[self.in_start[s]..self.in_start[s + 1]]
    }

    /// Log forward variables and the total log-likelihood.
    pub fn forward(&self, log_b: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
        let size = self.size();
        let mut alpha = Vec::with_capacity(log_b.len());
        alpha.push(
            (0..size)
                .map(|s| self.log_init[s] + log_b[0][self.base[s]])
                .collect::<Vec<_>>(),
        );
        let mut terms = Vec::new();
        for lb in &log_b[1..] {
            let prev = alpha.last().unwrap();
            let next: Vec<f64> = (0..size)
                .map(|s| {
                    terms.clear();
                    terms.extend(self.incoming(s).iter().map(|e| prev[e.from] + e.log_p));
                    logsumexp(&terms) + lb[self.base[s]]
                })
                .collect();
            alpha.push(next);
        }
        let total = logsumexp(alpha.last().unwrap());
        (alpha, total)
    }

    pub fn backward(&self, log_b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let size = self.size();
        let len = log_b.len();
        let mut beta = vec![vec![0.0; size]; len];
        let mut terms = Vec::new();
        for t in (0..len - 1).rev() {
            for s in 0..size {
                terms.clear();
                terms.extend(self.out[s].iter().map(|&ei| {
                    let e = &self.edges[ei];
                    e.log_p + log_b[t + 1][self.base[e.to]] + beta[t + 1][e.to]
                }));
                beta[t][s] = logsumexp(&terms);
            }
        }
        beta
    }

    /// Best expanded-state path and its log score. Ties go to the lowest
    /// expanded index, which orders by earlier base state first.
    pub fn viterbi(&self, log_b: &[Vec<f64>]) -> (Vec<usize>, f64) {
        let size = self.size();
        let len = log_b.len();
        let mut delta: Vec<f64> = (0..size)
            .map(|s| self.log_init[s] + log_b[0][self.base[s]])
            .collect();
        let mut back = vec![vec![usize::MAX; size]; len];
        for t in 1..len {
            let mut next = vec![f64::NEG_INFINITY; size];
            for s in 0..size {
                let mut best = f64::NEG_INFINITY;
                let mut arg = usize::MAX;
                for e in self.incoming(s) {
                    let v = delta[e.from] + e.log_p;
                    if v > best || (arg == usize::MAX && v == best) {
                        best = v;
                        arg = e.from;
                    }
                }
                next[s] = best + log_b[t][self.base[s]];
                back[t][s] = arg;
            }
            delta = next;
        }
        let mut last = 0;
        for s in 1..size {
            if delta[s] > delta[last] {
                last = s;
            }
        }
        let score = delta[last];
        let mut path = vec![0; len];
        path[len - 1] = last;
        for t in (1..len).rev() {
            let prev = back[t][path[t]];
            path[t - 1] = if prev == usize::MAX { 0 } else { prev };
        }
        (path, score)
    }
}
