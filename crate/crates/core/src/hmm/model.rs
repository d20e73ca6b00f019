use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::chain::Chain;
use crate::hmm::gmm::{kmeans_init, Gmm, GmmAccumulator, PreparedGmm, VarFloor};
use crate::hmm::logsumexp;
use crate::hmm::topology::{Order, TopologySpec};
use crate::hmm::transitions::{build_topology, TransitionModel};

/// Tolerance used when validating stochastic groups.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Continuous-density HMM with GMM emissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hmm {
    pub topology: TopologySpec,
    pub transitions: TransitionModel,
    pub emissions: Vec<Gmm>,
    pub var_floor: VarFloor,
}

/// The frame-level acoustic model of a speaker.
pub type AcousticHmm = Hmm;

/// Contiguous run of frames spent in one state, `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSegment {
    pub state: usize,
    pub start: usize,
    pub end: usize,
}

/// Best state path (0-based base states) and its run-length segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub path: Vec<usize>,
    pub log_score: f64,
    pub segments: Vec<StateSegment>,
}

/// Groups equal consecutive labels into segments.
pub fn runs(labels: &[usize]) -> Vec<StateSegment> {
    let mut segments: Vec<StateSegment> = Vec::new();
    for (t, &s) in labels.iter().enumerate() {
        match segments.last_mut() {
            Some(seg) if seg.state == s => seg.end = t + 1,
            _ => segments.push(StateSegment {
                state: s,
                start: t,
                end: t + 1,
            }),
        }
    }
    segments
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 20,
            rel_tol: 1e-4,
        }
    }
}

/// Outcome of Baum-Welch training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Total log-likelihood of the training data under each successive
    /// parameter set; the last entry belongs to the returned model.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

struct Counts {
    initial: Vec<f64>,
    params: Vec<f64>,
    emissions: Vec<GmmAccumulator>,
    occupancy: Vec<f64>,
    log_likelihood: f64,
    scored: usize,
}

impl Hmm {
    pub fn new(
        topology: TopologySpec,
        transitions: TransitionModel,
        emissions: Vec<Gmm>,
        var_floor: impl Into<VarFloor>,
    ) -> Result<Self> {
        let hmm = Self {
            topology,
            transitions,
            emissions,
            var_floor: var_floor.into(),
        };
        hmm.validate()?;
        Ok(hmm)
    }

    /// Flat start: each sequence is cut into `N` equal parts, the frames of
    /// part `j` are pooled for state `j` and clustered into a mixture.
    pub fn initialize(
        topology: TopologySpec,
        sequences: &[&[Vec<f64>]],
        mixtures: usize,
        var_floor: impl Into<VarFloor>,
        seed: u64,
    ) -> Result<Self> {
        let var_floor = var_floor.into();
        let transitions = build_topology(&topology)?;
        let n = topology.num_states;
        let sequences: Vec<&[Vec<f64>]> = sequences.iter().copied().filter(|s| !s.is_empty()).collect();
        if sequences.is_empty() {
            return Err(Error::EmptySequence);
        }
        let dim = sequences[0][0].len();
        let mut pools: Vec<Vec<&[f64]>> = vec![Vec::new(); n];
        for seq in &sequences {
            for (t, frame) in seq.iter().enumerate() {
                if frame.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: frame.len(),
                    });
                }
                pools[t * n / seq.len()].push(frame);
            }
        }
        let all: Vec<&[f64]> = sequences.iter().flat_map(|s| s.iter().map(Vec::as_slice)).collect();
        let emissions = pools
            .iter()
            .enumerate()
            .map(|(j, pool)| {
                let data = if pool.is_empty() { &all } else { pool };
                kmeans_init(data, mixtures, var_floor.clone(), seed.wrapping_add(j as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(topology, transitions, emissions, var_floor)
    }

    pub fn num_states(&self) -> usize {
        self.topology.num_states
    }

    pub fn dim(&self) -> usize {
        self.emissions.first().map_or(0, Gmm::dim)
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        let n = self.topology.num_states;
        let t = &self.transitions;
        if t.num_states != n || t.order != self.topology.order || self.emissions.len() != n {
            return Err(Error::InvalidModel("state counts or order disagree".into()));
        }
        let expected = build_topology(&self.topology)?;
        if t.initial_mask != expected.initial_mask
            || t.first_mask != expected.first_mask
            || t.second_mask != expected.second_mask
        {
            return Err(Error::InvalidModel("structural mask does not match the topology".into()));
        }
        t.validate(STOCHASTIC_TOL)?;
        let dim = self.dim();
        for g in &self.emissions {
            g.validate(self.var_floor.clone())?;
            if g.dim() != dim {
                return Err(Error::InvalidModel("emission dimensions disagree".into()));
            }
        }
        Ok(())
    }

    fn check_obs(&self, obs: &[Vec<f64>]) -> Result<()> {
        if obs.is_empty() {
            return Err(Error::EmptySequence);
        }
        let dim = self.dim();
        if let Some(f) = obs.iter().find(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.len(),
            });
        }
        Ok(())
    }

    /// `log b_j(o_t)` for every frame and state.
    pub fn log_emissions(&self, obs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check_obs(obs)?;
        let prepared: Vec<PreparedGmm> = self.emissions.iter().map(Gmm::prepare).collect();
        let mut buf = Vec::new();
        Ok(obs
            .iter()
            .map(|x| {
                prepared
                    .iter()
                    .map(|g| {
                        g.component_terms(x, &mut buf);
                        logsumexp(&buf)
                    })
                    .collect()
            })
            .collect())
    }

    /// Natural-log `P(O | model)`; `-inf` when no path can produce `obs`.
    pub fn forward_log_likelihood(&self, obs: &[Vec<f64>]) -> Result<f64> {
        let log_b = self.log_emissions(obs)?;
        Ok(Chain::new(&self.transitions).forward(&log_b).1)
    }

    /// Most likely state path. Segments are the runs of equal states.
    pub fn viterbi_segment(&self, obs: &[Vec<f64>]) -> Result<Alignment> {
        let log_b = self.log_emissions(obs)?;
        let chain = Chain::new(&self.transitions);
        let (expanded, log_score) = chain.viterbi(&log_b);
        let path: Vec<usize> = expanded.iter().map(|&s| chain.base[s]).collect();
        let segments = runs(&path);
        Ok(Alignment {
            path,
            log_score,
            segments,
        })
    }

    fn expectation(&self, chain: &Chain, sequences: &[&[Vec<f64>]]) -> Result<Counts> {
        let n = self.num_states();
        let n_params = n * n + self.transitions.second.len();
        let prepared: Vec<PreparedGmm> = self.emissions.iter().map(Gmm::prepare).collect();
        let mut counts = Counts {
            initial: vec![0.0; n],
            params: vec![0.0; n_params],
            emissions: self
                .emissions
                .iter()
                .map(|g| GmmAccumulator::new(g.num_components(), g.dim()))
                .collect(),
            occupancy: vec![0.0; n],
            log_likelihood: 0.0,
            scored: 0,
        };
        let mut terms = Vec::new();
        for obs in sequences {
            self.check_obs(obs)?;
            let len = obs.len();
            // per-frame component terms, kept for the emission update
            let comp: Vec<Vec<Vec<f64>>> = obs
                .iter()
                .map(|x| {
                    prepared
                        .iter()
                        .map(|g| {
                            g.component_terms(x, &mut terms);
                            terms.clone()
                        })
                        .collect()
                })
                .collect();
            let log_b: Vec<Vec<f64>> = comp
                .iter()
                .map(|row| row.iter().map(|c| logsumexp(c)).collect())
                .collect();
            let (alpha, total) = chain.forward(&log_b);
            if !total.is_finite() {
                continue;
            }
            let beta = chain.backward(&log_b);
            counts.log_likelihood += total;
            counts.scored += 1;

            for s in 0..chain.size() {
                let g = (alpha[0][s] + beta[0][s] - total).exp();
                if s < n && g > 0.0 {
                    counts.initial[chain.base[s]] += g;
                }
            }
            for t in 0..len - 1 {
                for e in &chain.edges {
                    let x = alpha[t][e.from] + e.log_p + log_b[t + 1][chain.base[e.to]]
                        + beta[t + 1][e.to]
                        - total;
                    if x > f64::NEG_INFINITY {
                        counts.params[e.param] += x.exp();
                    }
                }
            }
            let mut gamma_base = vec![0.0; n];
            for t in 0..len {
                gamma_base.iter_mut().for_each(|g| *g = 0.0);
                for s in 0..chain.size() {
                    let x = alpha[t][s] + beta[t][s] - total;
                    if x > f64::NEG_INFINITY {
                        gamma_base[chain.base[s]] += x.exp();
                    }
                }
                for j in 0..n {
                    let g = gamma_base[j];
                    if g <= 0.0 {
                        continue;
                    }
                    counts.occupancy[j] += g;
                    for (m, &c) in comp[t][j].iter().enumerate() {
                        let r = (c - log_b[t][j]).exp();
                        if r > 0.0 {
                            counts.emissions[j].add(m, g * r, &obs[t]);
                        }
                    }
                }
            }
        }
        Ok(counts)
    }

    fn maximization(&mut self, counts: &Counts, warnings: &mut Vec<String>) {
        let n = self.num_states();
        let t = &mut self.transitions;
        normalize_groups(&mut t.initial, &t.initial_mask, &counts.initial, n);
        normalize_groups(&mut t.first, &t.first_mask, &counts.params[..n * n], n);
        if t.order == Order::Second {
            normalize_groups(&mut t.second, &t.second_mask, &counts.params[n * n..], n);
        }
        for j in 0..n {
            if counts.occupancy[j] <= 0.0 {
                warnings.push(format!("state {} received no occupancy; emission left unchanged", j + 1));
                continue;
            }
            counts.emissions[j].update(&mut self.emissions[j], &self.var_floor);
        }
    }

    /// Baum-Welch. Structural zeros stay zero because masked entries have no
    /// edge in the expanded chain and never collect counts.
    pub fn train_em(&mut self, sequences: &[&[Vec<f64>]], config: &EmConfig) -> Result<TrainReport> {
        if sequences.is_empty() {
            return Err(Error::Training("no training sequences".into()));
        }
        let mut trace: Vec<f64> = Vec::new();
        let mut warnings: Vec<String> = Vec::new();
        let mut converged = false;
        for iter in 0..=config.max_iters {
            let chain = Chain::new(&self.transitions);
            let counts = self.expectation(&chain, sequences)?;
            if counts.scored == 0 {
                return Err(Error::Training(
                    "every training sequence has zero likelihood under the model".into(),
                ));
            }
            if counts.scored < sequences.len() && iter == 0 {
                warnings.push(format!(
                    "{} of {} sequences have zero likelihood and were skipped",
                    sequences.len() - counts.scored,
                    sequences.len()
                ));
            }
            let ll = counts.log_likelihood;
            if let Some(&prev) = trace.last() {
                let gain: f64 = ll - prev;
                if gain.abs() <= config.rel_tol * prev.abs() {
                    trace.push(ll);
                    converged = true;
                    break;
                }
            }
            trace.push(ll);
            if iter == config.max_iters {
                break;
            }
            let mut step_warnings = Vec::new();
            self.maximization(&counts, &mut step_warnings);
            for w in step_warnings {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
        Ok(TrainReport {
            trace,
            converged,
            warnings,
        })
    }
}

fn draw(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

impl Hmm {
    /// Draws a state path and observation sequence of length `len`.
    pub fn sample(&self, len: usize, rng: &mut impl Rng) -> (Vec<usize>, Vec<Vec<f64>>) {
        let n = self.num_states();
        let t = &self.transitions;
        let mut states: Vec<usize> = Vec::with_capacity(len);
        for step in 0..len {
            let s = match (step, t.order) {
                (0, _) => draw(rng, &t.initial),
                (1, _) | (_, Order::First) => {
                    let i = states[step - 1];
                    draw(rng, &t.first[i * n..(i + 1) * n])
                }
                (_, Order::Second) => {
                    let (i, j) = (states[step - 2], states[step - 1]);
                    draw(rng, &t.second[(i * n + j) * n..(i * n + j + 1) * n])
                }
            };
            states.push(s);
        }
        let obs = states
            .iter()
            .map(|&s| {
                let g = &self.emissions[s];
                let m = draw(rng, &g.weights);
                g.means[m]
                    .iter()
                    .zip(&g.variances[m])
                    .map(|(mu, var)| {
                        let z: f64 = StandardNormal.sample(rng);
                        mu + var.sqrt() * z
                    })
                    .collect()
            })
            .collect();
        (states, obs)
    }
}

fn normalize_groups(p: &mut [f64], mask: &[bool], counts: &[f64], group: usize) {
    for ((pg, mg), cg) in p.chunks_mut(group).zip(mask.chunks(group)).zip(counts.chunks(group)) {
        let total: f64 = cg.iter().zip(mg).filter(|(_, &m)| m).map(|(c, _)| c).sum();
        if total <= 0.0 {
            continue;
        }
        for ((v, &m), &c) in pg.iter_mut().zip(mg).zip(cg) {
            *v = if m { c / total } else { 0.0 };
        }
    }
}
