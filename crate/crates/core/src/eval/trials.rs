use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Environment, Gender, ManifestEntry};
use crate::error::Result;
use crate::eval::{pooled_accuracy, TrialRecord};
use crate::features::Utterance;
use crate::speaker::{score_speakers, Registry, ScoreOptions, SpeakerScores, Variant};

/// A test utterance together with its alpha-independent speaker scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrial {
    pub path: String,
    pub true_speaker: String,
    pub sentence: String,
    pub environment: Environment,
    pub gender: Gender,
    pub scores: SpeakerScores,
}

impl ScoredTrial {
    pub fn decide(&self, alpha: f64) -> Result<TrialRecord> {
        let result = self.scores.fuse(alpha)?;
        Ok(TrialRecord {
            path: self.path.clone(),
            true_speaker: self.true_speaker.clone(),
            predicted_speaker: result.winner,
            sentence: self.sentence.clone(),
            environment: self.environment,
            gender: self.gender,
            variant: self.scores.variant,
            alpha,
        })
    }
}

/// Scores each test utterance against the registry, preserving input order.
pub fn score_trials(
    items: &[(&ManifestEntry, &Utterance)],
    variant: Variant,
    registry: &Registry,
    options: ScoreOptions,
) -> Result<Vec<ScoredTrial>> {
    items
        .par_iter()
        .map(|(entry, utt)| {
            let scores = score_speakers(utt, &entry.sentence, variant, registry, options)?;
            Ok(ScoredTrial {
                path: entry.path.clone(),
                true_speaker: entry.speaker.clone(),
                sentence: entry.sentence.clone(),
                environment: entry.environment,
                gender: entry.gender,
                scores,
            })
        })
        .collect()
}

pub fn decide_all(trials: &[ScoredTrial], alpha: f64) -> Result<Vec<TrialRecord>> {
    trials.iter().map(|t| t.decide(alpha)).collect()
}

/// `0.0, 0.1, ..., 1.0`.
pub fn default_alphas() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    /// Percentage correct per environment present in the trials.
    pub accuracy: BTreeMap<Environment, f64>,
}

fn sweep_point(records: &[TrialRecord], alpha: f64) -> SweepPoint {
    let accuracy = [Environment::Neutral, Environment::Shouted]
        .into_iter()
        .filter_map(|env| pooled_accuracy(records, env).map(|a| (env, a)))
        .collect();
    SweepPoint { alpha, accuracy }
}

/// Accuracy against alpha, reusing the cached per-speaker scores.
pub fn alpha_sweep(trials: &[ScoredTrial], alphas: &[f64]) -> Result<Vec<SweepPoint>> {
    alphas
        .iter()
        .map(|&alpha| Ok(sweep_point(&decide_all(trials, alpha)?, alpha)))
        .collect()
}

/// Same curve as [`alpha_sweep`], rescoring every utterance for every alpha.
pub fn alpha_sweep_uncached(
    items: &[(&ManifestEntry, &Utterance)],
    variant: Variant,
    registry: &Registry,
    options: ScoreOptions,
    alphas: &[f64],
) -> Result<Vec<SweepPoint>> {
    alphas
        .iter()
        .map(|&alpha| {
            let trials = score_trials(items, variant, registry, options)?;
            Ok(sweep_point(&decide_all(&trials, alpha)?, alpha))
        })
        .collect()
}
