//! End-to-end protocol: enroll on neutral training takes, identify every
//! test take, and tabulate.

use std::collections::BTreeMap;

use crate::config::Config;
use crate::corpus::{ingest_corpus, load_utterances, CorpusManifest, Environment, Session};
use crate::error::{Error, Result};
use crate::eval::report::{ExperimentResults, TTestRow};
use crate::eval::{
    accuracy_table, alpha_sweep, cross_validate, decide_all, fold_samples, partition, score_trials, t_statistic,
    AccuracyTable, CrossValSummary, ScoredTrial,
};
use crate::features::{Frontend, Utterance, PROTOCOL_SAMPLE_RATE};
use crate::speaker::{enroll_all, EnrollmentGroup, Registry, Variant};

/// A featurized corpus, entries and utterances index-aligned.
pub struct PreparedCorpus {
    pub manifest: CorpusManifest,
    pub utterances: Vec<Utterance>,
    pub warnings: Vec<String>,
}

pub fn prepare_corpus(config: &Config) -> Result<PreparedCorpus> {
    let ingested =
        ingest_corpus(&config.corpus.root, config.corpus.manifest_path()).map_err(|e| e.in_stage("ingest"))?;
    if config.corpus.protocol {
        ingested
            .manifest
            .check_protocol(&config.synth.takes)
            .map_err(|e| e.in_stage("ingest"))?;
    }
    let frontend = Frontend::new(config.frontend.clone(), PROTOCOL_SAMPLE_RATE);
    let utterances = load_utterances(&config.corpus.root, &ingested.manifest.entries, &frontend)
        .map_err(|e| e.in_stage("features"))?;
    Ok(PreparedCorpus {
        manifest: ingested.manifest,
        utterances,
        warnings: ingested.warnings,
    })
}

impl PreparedCorpus {
    fn select(&self, session: Session) -> impl Iterator<Item = (usize, &crate::corpus::ManifestEntry)> {
        self.manifest.entries.iter().enumerate().filter(move |(_, e)| e.session == session)
    }

    /// One enrollment group per (speaker, sentence) from the neutral training takes.
    pub fn training_groups(&self) -> Vec<EnrollmentGroup<'_>> {
        let mut groups: BTreeMap<(&str, &str), Vec<&Utterance>> = BTreeMap::new();
        for (i, e) in self.select(Session::Train) {
            if e.environment == Environment::Neutral {
                groups.entry((&e.speaker, &e.sentence)).or_default().push(&self.utterances[i]);
            }
        }
        groups
            .into_iter()
            .map(|((s, t), utterances)| EnrollmentGroup {
                speaker_id: s.to_string(),
                sentence_id: t.to_string(),
                utterances,
            })
            .collect()
    }

    pub fn test_items(&self) -> Vec<(&crate::corpus::ManifestEntry, &Utterance)> {
        self.select(Session::Test).map(|(i, e)| (e, &self.utterances[i])).collect()
    }
}

/// Enrolls every requested variant on the neutral training takes.
pub fn enroll_corpus(corpus: &PreparedCorpus, config: &Config) -> Result<(Registry, Vec<String>)> {
    let groups = corpus.training_groups();
    if groups.is_empty() {
        return Err(Error::CorpusTooSmall("no neutral training takes".into()).in_stage("enroll"));
    }
    let mut registry = Registry::new();
    let mut warnings = Vec::new();
    for &variant in &config.experiment.variants {
        let (r, w) = enroll_all(&groups, variant, &config.model).map_err(|e| e.in_stage("enroll"))?;
        for m in r.iter() {
            registry.insert(m.clone());
        }
        warnings.extend(w);
    }
    Ok((registry, warnings))
}

/// Per-variant scored test trials.
pub fn score_corpus(
    corpus: &PreparedCorpus,
    registry: &Registry,
    config: &Config,
) -> Result<BTreeMap<Variant, Vec<ScoredTrial>>> {
    let items = corpus.test_items();
    config
        .experiment
        .variants
        .iter()
        .map(|&v| {
            let trials = score_trials(&items, v, registry, config.identify.scoring).map_err(|e| e.in_stage("identify"))?;
            Ok((v, trials))
        })
        .collect()
}

fn samples(summary: &CrossValSummary, env: Environment) -> Vec<f64> {
    summary.samples(env)
}

fn t_rows(
    pairs: &[(String, String, &CrossValSummary, &CrossValSummary)],
) -> Result<Vec<TTestRow>> {
    let mut rows = Vec::new();
    for env in [Environment::Neutral, Environment::Shouted] {
        for (first, second, a, b) in pairs {
            let (xa, xb) = (samples(a, env), samples(b, env));
            if xa.is_empty() || xb.is_empty() {
                continue;
            }
            rows.push(TTestRow {
                environment: env,
                first: first.clone(),
                second: second.clone(),
                result: t_statistic(&xa, &xb)?,
            });
        }
    }
    Ok(rows)
}

/// Runs the configured protocol. With `registry` given, enrollment is skipped
/// and those models are used instead.
pub fn run_experiment(config: &Config, registry: Option<&Registry>) -> Result<ExperimentResults> {
    config.validate()?;
    let corpus = prepare_corpus(config)?;
    run_prepared(&corpus, config, registry)
}

pub fn run_prepared(corpus: &PreparedCorpus, config: &Config, registry: Option<&Registry>) -> Result<ExperimentResults> {
    let exp = &config.experiment;
    let alpha = config.identify.alpha;
    let mut warnings = corpus.warnings.clone();
    let owned;
    let registry = match registry {
        Some(r) => r,
        None => {
            let (r, w) = enroll_corpus(corpus, config)?;
            warnings.extend(w);
            owned = r;
            &owned
        }
    };
    let scored = score_corpus(corpus, registry, config)?;

    let mut fused_records = Vec::new();
    let mut acoustic_records = Vec::new();
    for trials in scored.values() {
        fused_records.extend(decide_all(trials, alpha).map_err(|e| e.in_stage("identify"))?);
        acoustic_records.extend(decide_all(trials, 0.0).map_err(|e| e.in_stage("identify"))?);
    }
    if fused_records.is_empty() {
        return Err(Error::CorpusTooSmall("no test takes".into()).in_stage("evaluate"));
    }
    let fused: AccuracyTable = accuracy_table(&fused_records).map_err(|e| e.in_stage("evaluate"))?;
    let acoustic = accuracy_table(&acoustic_records).map_err(|e| e.in_stage("evaluate"))?;
    let mut trial_counts = BTreeMap::new();
    if let Some(trials) = scored.values().next() {
        for t in trials {
            *trial_counts.entry(t.environment).or_insert(0) += 1;
        }
    }

    let mut sweep = BTreeMap::new();
    if exp.sweep {
        for (&v, trials) in &scored {
            sweep.insert(v, alpha_sweep(trials, &exp.alphas).map_err(|e| e.in_stage("sweep"))?);
        }
    }

    // t-test samples: per-subset accuracies, fused and acoustic-only
    let mut fused_samples = BTreeMap::new();
    let mut acoustic_samples = BTreeMap::new();
    let mut crossval = BTreeMap::new();
    let sample_source = if exp.crossval {
        let part = partition(&corpus.manifest.entries, exp.num_subsets, exp.seed).map_err(|e| e.in_stage("crossval"))?;
        for &v in &exp.variants {
            let run = cross_validate(
                &corpus.manifest.entries,
                &corpus.utterances,
                v,
                &part,
                &config.model,
                config.identify.scoring,
            )
            .map_err(|e| e.in_stage("crossval"))?;
            let f = run.summary(alpha).map_err(|e| e.in_stage("crossval"))?;
            acoustic_samples.insert(v, run.summary(0.0).map_err(|e| e.in_stage("crossval"))?);
            crossval.insert(v, f.clone());
            fused_samples.insert(v, f);
        }
        format!("accuracy of {} cross-validation subsets", exp.num_subsets)
    } else {
        for (&v, trials) in &scored {
            let f = fold_samples(trials, exp.ttest_folds, exp.seed, alpha).map_err(|e| e.in_stage("ttest"))?;
            let a = fold_samples(trials, exp.ttest_folds, exp.seed, 0.0).map_err(|e| e.in_stage("ttest"))?;
            fused_samples.insert(v, f);
            acoustic_samples.insert(v, a);
        }
        format!("accuracy of {} folds of the test takes", exp.ttest_folds)
    };

    let mut best_pairs = Vec::new();
    if let Some(best) = fused_samples.get(&Variant::Csphmm2) {
        for (&v, s) in &fused_samples {
            if v != Variant::Csphmm2 {
                best_pairs.push((Variant::Csphmm2.name().to_string(), v.name().to_string(), best, s));
            }
        }
    }
    let acoustic_pairs: Vec<_> = fused_samples
        .iter()
        .map(|(v, s)| (v.name().to_string(), v.acoustic_name().to_string(), s, &acoustic_samples[v]))
        .collect();
    let versus_best = t_rows(&best_pairs).map_err(|e| e.in_stage("ttest"))?;
    let versus_acoustic = t_rows(&acoustic_pairs).map_err(|e| e.in_stage("ttest"))?;

    Ok(ExperimentResults {
        variants: exp.variants.clone(),
        alpha,
        seed: exp.seed,
        trial_counts,
        fused,
        acoustic,
        sample_source,
        versus_best,
        versus_acoustic,
        sweep,
        crossval,
        records: fused_records.into_iter().chain(acoustic_records).collect(),
        warnings,
    })
}
