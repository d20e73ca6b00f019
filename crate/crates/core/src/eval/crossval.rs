use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Environment, ManifestEntry, Session};
use crate::error::{Error, Result};
use crate::eval::{decide_all, pooled_accuracy, sample_sd, score_trials, ScoredTrial};
use crate::features::Utterance;
use crate::speaker::{enroll_all, EnrollConfig, EnrollmentGroup, ScoreOptions, Variant};

/// Disjoint subsets of entry indices that together cover the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub subsets: Vec<Vec<usize>>,
}

/// Seeded stratified partition. Entries are grouped by (speaker, sentence,
/// environment, session), shuffled within each group, and dealt round-robin
/// with one cursor running across all groups. Subset sizes therefore differ
/// by at most one, and every subset receives a training take of every
/// (speaker, sentence) as long as each has at least `num_subsets` of them.
pub fn partition(entries: &[ManifestEntry], num_subsets: usize, seed: u64) -> Result<Partition> {
    if num_subsets < 2 {
        return Err(Error::Config(format!("need at least 2 subsets, got {num_subsets}")));
    }
    if entries.len() < num_subsets {
        return Err(Error::CorpusTooSmall(format!(
            "{} entries cannot fill {num_subsets} subsets",
            entries.len()
        )));
    }
    let mut groups: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        groups
            .entry((e.speaker.as_str(), e.sentence.as_str(), e.environment, e.session))
            .or_default()
            .push(i);
    }
    for ((speaker, sentence, _, session), idx) in &groups {
        if *session == Session::Train && idx.len() < num_subsets {
            return Err(Error::CorpusTooSmall(format!(
                "{speaker}/{sentence} has {} training takes; at least {num_subsets} are needed for {num_subsets} subsets",
                idx.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subsets = vec![Vec::new(); num_subsets];
    let mut cursor = 0;
    for idx in groups.values_mut() {
        idx.shuffle(&mut rng);
        for &i in idx.iter() {
            subsets[cursor % num_subsets].push(i);
            cursor += 1;
        }
    }
    for s in &mut subsets {
        s.sort_unstable();
    }
    Ok(Partition { subsets })
}

/// Scored test trials of every subset, in subset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValRun {
    pub variant: Variant,
    pub subsets: Vec<Vec<ScoredTrial>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValSummary {
    pub alpha: f64,
    pub per_subset: Vec<BTreeMap<Environment, f64>>,
    pub mean: BTreeMap<Environment, f64>,
    pub sd: BTreeMap<Environment, f64>,
}

impl CrossValSummary {
    /// Per-subset accuracies for one environment, in subset order.
    pub fn samples(&self, env: Environment) -> Vec<f64> {
        self.per_subset.iter().filter_map(|m| m.get(&env).copied()).collect()
    }
}

/// Mean and sample standard deviation of per-subset accuracies.
pub fn summarize(alpha: f64, per_subset: Vec<BTreeMap<Environment, f64>>) -> CrossValSummary {
    let mut mean = BTreeMap::new();
    let mut sd = BTreeMap::new();
    for env in [Environment::Neutral, Environment::Shouted] {
        let xs: Vec<f64> = per_subset.iter().filter_map(|m| m.get(&env).copied()).collect();
        if !xs.is_empty() {
            mean.insert(env, xs.iter().sum::<f64>() / xs.len() as f64);
            sd.insert(env, sample_sd(&xs));
        }
    }
    CrossValSummary { alpha, per_subset, mean, sd }
}

impl CrossValRun {
    pub fn summary(&self, alpha: f64) -> Result<CrossValSummary> {
        let per_subset = self
            .subsets
            .iter()
            .map(|trials| {
                let records = decide_all(trials, alpha)?;
                Ok([Environment::Neutral, Environment::Shouted]
                    .into_iter()
                    .filter_map(|env| pooled_accuracy(&records, env).map(|a| (env, a)))
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(summarize(alpha, per_subset))
    }
}

/// For each subset, enrolls on its training takes and scores its test takes.
pub fn cross_validate(
    entries: &[ManifestEntry],
    utterances: &[Utterance],
    variant: Variant,
    partition: &Partition,
    enroll: &EnrollConfig,
    options: ScoreOptions,
) -> Result<CrossValRun> {
    if entries.len() != utterances.len() {
        return Err(Error::Stats(format!(
            "{} entries but {} utterances",
            entries.len(),
            utterances.len()
        )));
    }
    let mut subsets = Vec::with_capacity(partition.subsets.len());
    for (k, subset) in partition.subsets.iter().enumerate() {
        let mut groups: BTreeMap<(&str, &str), Vec<&Utterance>> = BTreeMap::new();
        let mut tests = Vec::new();
        for &i in subset {
            let e = &entries[i];
            match e.session {
                Session::Train => groups.entry((&e.speaker, &e.sentence)).or_default().push(&utterances[i]),
                Session::Test => tests.push((e, &utterances[i])),
            }
        }
        let groups: Vec<EnrollmentGroup> = groups
            .into_iter()
            .map(|((speaker, sentence), utterances)| EnrollmentGroup {
                speaker_id: speaker.to_string(),
                sentence_id: sentence.to_string(),
                utterances,
            })
            .collect();
        let (registry, warnings) = enroll_all(&groups, variant, enroll)?;
        for w in warnings {
            log::warn!("subset {}: {w}", k + 1);
        }
        subsets.push(score_trials(&tests, variant, &registry, options)?);
    }
    Ok(CrossValRun { variant, subsets })
}

/// Splits already scored test trials into `folds` stratified groups, giving
/// per-fold accuracies when no cross-validation run is available.
pub fn fold_samples(trials: &[ScoredTrial], folds: usize, seed: u64, alpha: f64) -> Result<CrossValSummary> {
    if folds < 2 || trials.len() < folds {
        return Err(Error::CorpusTooSmall(format!(
            "{} trials cannot be split into {folds} folds",
            trials.len()
        )));
    }
    let mut groups: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, t) in trials.iter().enumerate() {
        groups
            .entry((t.true_speaker.as_str(), t.sentence.as_str(), t.environment))
            .or_default()
            .push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buckets = vec![Vec::new(); folds];
    let mut cursor = 0;
    for idx in groups.values_mut() {
        idx.shuffle(&mut rng);
        for &i in idx.iter() {
            buckets[cursor % folds].push(trials[i].clone());
            cursor += 1;
        }
    }
    CrossValRun {
        variant: trials[0].scores.variant,
        subsets: buckets,
    }
    .summary(alpha)
}
