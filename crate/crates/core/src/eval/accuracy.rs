use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Environment, Gender};
use crate::error::{Error, Result};
use crate::speaker::Variant;

/// Outcome of identifying one test utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub path: String,
    pub true_speaker: String,
    pub predicted_speaker: String,
    pub sentence: String,
    pub environment: Environment,
    pub gender: Gender,
    pub variant: Variant,
    pub alpha: f64,
}

impl TrialRecord {
    pub fn correct(&self) -> bool {
        self.true_speaker == self.predicted_speaker
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.correct as f64 / self.total as f64)
    }
}

/// Correct/total counts per (variant, environment, gender). Cells without
/// trials are absent rather than zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccuracyTable {
    pub cells: BTreeMap<(Variant, Environment, Gender), Tally>,
}

pub fn accuracy_table(records: &[TrialRecord]) -> Result<AccuracyTable> {
    if records.is_empty() {
        return Err(Error::Stats("no trial records".into()));
    }
    let mut cells: BTreeMap<_, Tally> = BTreeMap::new();
    for r in records {
        let cell = cells.entry((r.variant, r.environment, r.gender)).or_default();
        cell.total += 1;
        cell.correct += r.correct() as usize;
    }
    Ok(AccuracyTable { cells })
}

impl AccuracyTable {
    pub fn percent(&self, variant: Variant, env: Environment, gender: Gender) -> Option<f64> {
        self.cells.get(&(variant, env, gender)).and_then(Tally::percent)
    }

    /// Unweighted mean of the Male and Female percentages that are present.
    pub fn average(&self, variant: Variant, env: Environment) -> Option<f64> {
        let present: Vec<f64> = [Gender::Male, Gender::Female]
            .into_iter()
            .filter_map(|g| self.percent(variant, env, g))
            .collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    }

    pub fn variants(&self) -> Vec<Variant> {
        let mut v: Vec<Variant> = self.cells.keys().map(|k| k.0).collect();
        v.dedup();
        v
    }
}

/// Percentage correct over all records for one environment.
pub fn pooled_accuracy(records: &[TrialRecord], env: Environment) -> Option<f64> {
    let mut t = Tally::default();
    for r in records.iter().filter(|r| r.environment == env) {
        t.total += 1;
        t.correct += r.correct() as usize;
    }
    t.percent()
}
