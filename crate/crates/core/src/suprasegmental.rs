//! Suprasegmental layer: a small HMM over groups of acoustic states that
//! observes segment-level prosody, and the weighted fusion of its score with
//! the acoustic score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ProsodicSequence, Utterance};
use crate::hmm::{runs, EmConfig, Hmm, StateSegment, TopologySpec, TrainReport, VarFloor};

/// Prosodic model layered over an acoustic model whose states are grouped in
/// contiguous blocks of `group_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuprasegmentalHmm {
    pub group_size: usize,
    pub model: Hmm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuprasegmentalConfig {
    pub group_size: usize,
    pub mixtures: usize,
    pub var_floor: f64,
    /// Each dimension's floor is also at least this fraction of that
    /// dimension's variance over all training segments. 0 disables it.
    pub relative_var_floor: f64,
    pub em: EmConfig,
}

impl Default for SuprasegmentalConfig {
    fn default() -> Self {
        Self {
            group_size: 3,
            mixtures: 2,
            var_floor: 1e-4,
            relative_var_floor: 0.1,
            em: EmConfig::default(),
        }
    }
}

/// 0-based acoustic state to 0-based suprasegmental state.
pub fn suprasegmental_label(state: usize, group_size: usize) -> usize {
    state / group_size
}

/// Runs of equal suprasegmental labels along an acoustic state path.
pub fn suprasegmental_segments(path: &[usize], group_size: usize) -> Vec<StateSegment> {
    let labels: Vec<usize> = path.iter().map(|&s| suprasegmental_label(s, group_size)).collect();
    runs(&labels)
}

/// The suprasegmental topology mirrors the acoustic one over `N / group_size` states.
pub fn mirrored_topology(acoustic: &TopologySpec, group_size: usize) -> Result<TopologySpec> {
    if group_size == 0 || !acoustic.num_states.is_multiple_of(group_size) {
        return Err(Error::Topology(format!(
            "{} acoustic states cannot be grouped in blocks of {group_size}",
            acoustic.num_states
        )));
    }
    TopologySpec::new(acoustic.kind, acoustic.order, acoustic.num_states / group_size)
}

/// Viterbi-aligns the utterance with the acoustic model, merges frames by
/// suprasegmental state and measures prosody over each merged segment.
pub fn derive_suprasegmental_obs(acoustic: &Hmm, group_size: usize, utterance: &Utterance) -> Result<ProsodicSequence> {
    if utterance.observations.is_empty() {
        return Err(Error::EmptySequence);
    }
    let alignment = acoustic.viterbi_segment(&utterance.observations.frames)?;
    let segments = suprasegmental_segments(&alignment.path, group_size);
    let mut boundaries: Vec<usize> = segments.iter().map(|s| s.start).collect();
    boundaries.push(alignment.path.len());
    utterance.prosody.segment(&boundaries)
}

fn as_rows(seq: &ProsodicSequence) -> Vec<Vec<f64>> {
    seq.iter().map(|v| v.to_vec()).collect()
}

/// Per-dimension floor `max(absolute, relative * pooled variance)`.
fn floor_from_data(rows: &[Vec<Vec<f64>>], absolute: f64, relative: f64) -> VarFloor {
    let all: Vec<&Vec<f64>> = rows.iter().flatten().collect();
    if relative <= 0.0 || all.is_empty() {
        return VarFloor::Uniform(absolute);
    }
    let n = all.len() as f64;
    let floors = (0..all[0].len())
        .map(|d| {
            let mean = all.iter().map(|x| x[d]).sum::<f64>() / n;
            let var = all.iter().map(|x| (x[d] - mean).powi(2)).sum::<f64>() / n;
            (relative * var).max(absolute)
        })
        .collect();
    VarFloor::PerDim(floors)
}

/// Trains the prosodic model on top of an already trained acoustic model.
pub fn train_suprasegmental(
    acoustic: &Hmm,
    utterances: &[&Utterance],
    config: &SuprasegmentalConfig,
    seed: u64,
) -> Result<(SuprasegmentalHmm, TrainReport)> {
    let spec = mirrored_topology(&acoustic.topology, config.group_size)?;
    let derived = utterances
        .iter()
        .map(|u| derive_suprasegmental_obs(acoustic, config.group_size, u))
        .collect::<Result<Vec<_>>>()?;
    if derived.iter().all(|d| d.len() < 2) {
        return Err(Error::InsufficientProsody(format!(
            "all {} derived prosodic sequences have fewer than 2 segments",
            derived.len()
        )));
    }
    let rows: Vec<Vec<Vec<f64>>> = derived.iter().map(as_rows).collect();
    let refs: Vec<&[Vec<f64>]> = rows.iter().map(|r| r.as_slice()).collect();
    let floor = floor_from_data(&rows, config.var_floor, config.relative_var_floor);
    let mut model = Hmm::initialize(spec, &refs, config.mixtures, floor, seed)?;
    let report = model.train_em(&refs, &config.em)?;
    Ok((
        SuprasegmentalHmm {
            group_size: config.group_size,
            model,
        },
        report,
    ))
}

impl SuprasegmentalHmm {
    pub fn num_states(&self) -> usize {
        self.model.num_states()
    }

    pub fn log_likelihood(&self, prosody: &ProsodicSequence) -> Result<f64> {
        self.model.forward_log_likelihood(&as_rows(prosody))
    }

    /// Prosodic log-likelihood of an utterance segmented by `acoustic`.
    pub fn score(&self, acoustic: &Hmm, utterance: &Utterance) -> Result<f64> {
        let prosody = derive_suprasegmental_obs(acoustic, self.group_size, utterance)?;
        self.log_likelihood(&prosody)
    }
}

/// Acoustic and prosodic log-likelihoods and their weighted combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedScore {
    pub acoustic_logp: f64,
    pub prosodic_logp: f64,
    pub alpha: f64,
    pub fused: f64,
}

/// `(1 - alpha) * acoustic + alpha * prosodic`. A stream with zero weight
/// contributes nothing, even when its score is `-inf`.
pub fn combined_log_score(acoustic_logp: f64, prosodic_logp: f64, alpha: f64) -> Result<CombinedScore> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let weighted = |w: f64, x: f64| if w == 0.0 { 0.0 } else { w * x };
    let fused = if alpha == 0.0 {
        acoustic_logp
    } else if alpha == 1.0 {
        prosodic_logp
    } else {
        weighted(1.0 - alpha, acoustic_logp) + weighted(alpha, prosodic_logp)
    };
    Ok(CombinedScore {
        acoustic_logp,
        prosodic_logp,
        alpha,
        fused,
    })
}
