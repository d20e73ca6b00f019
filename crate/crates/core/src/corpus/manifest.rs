use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    Neutral,
    Shouted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Session {
    Train,
    Test,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "Male",
            Gender::Female => "Female",
        })
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Environment::Neutral => "neutral",
            Environment::Shouted => "shouted",
        })
    }
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Session::Train => "train",
            Session::Test => "test",
        })
    }
}

/// One recording. `path` is relative to the corpus root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub speaker: String,
    pub gender: Gender,
    pub sentence: String,
    pub environment: Environment,
    pub session: Session,
    pub take: u32,
}

pub type EntryKey = (String, String, Environment, Session, u32);

impl ManifestEntry {
    pub fn key(&self) -> EntryKey {
        (
            self.speaker.clone(),
            self.sentence.clone(),
            self.environment,
            self.session,
            self.take,
        )
    }
}

/// Takes per (speaker, sentence) under the collection protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolCounts {
    pub neutral_train: u32,
    pub neutral_test: u32,
    pub shouted_test: u32,
}

impl Default for ProtocolCounts {
    fn default() -> Self {
        Self {
            neutral_train: 5,
            neutral_test: 4,
            shouted_test: 9,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let entries = reader.deserialize().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { entries })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Keys that occur more than once.
    pub fn duplicates(&self) -> Vec<EntryKey> {
        let mut seen: BTreeMap<EntryKey, usize> = BTreeMap::new();
        for e in &self.entries {
            *seen.entry(e.key()).or_default() += 1;
        }
        seen.into_iter().filter(|(_, n)| *n > 1).map(|(k, _)| k).collect()
    }

    pub fn speakers(&self) -> Vec<String> {
        let mut s: Vec<String> = self.entries.iter().map(|e| e.speaker.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn sentences(&self) -> Vec<String> {
        let mut s: Vec<String> = self.entries.iter().map(|e| e.sentence.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Checks that every (speaker, sentence) pair has exactly the protocol's
    /// take counts, and that no key repeats.
    pub fn check_protocol(&self, counts: &ProtocolCounts) -> Result<()> {
        let mut tally: BTreeMap<(String, String), [u32; 3]> = BTreeMap::new();
        let mut problems = Vec::new();
        for e in &self.entries {
            let slot = match (e.environment, e.session) {
                (Environment::Neutral, Session::Train) => 0,
                (Environment::Neutral, Session::Test) => 1,
                (Environment::Shouted, Session::Test) => 2,
                (Environment::Shouted, Session::Train) => {
                    problems.push(format!("{}: shouted takes are test-only", e.path));
                    continue;
                }
            };
            tally.entry((e.speaker.clone(), e.sentence.clone())).or_default()[slot] += 1;
        }
        let want = [counts.neutral_train, counts.neutral_test, counts.shouted_test];
        for ((speaker, sentence), got) in tally {
            if got != want {
                problems.push(format!(
                    "{speaker}/{sentence}: takes (neutral train, neutral test, shouted test) = {got:?}, expected {want:?}"
                ));
            }
        }
        for k in self.duplicates() {
            problems.push(format!("duplicate entry {k:?}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Manifest(problems))
        }
    }
}
