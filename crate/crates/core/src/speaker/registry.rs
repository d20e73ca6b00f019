use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::speaker::{SpeakerModel, Variant};

pub const INDEX_FILE: &str = "index.csv";

/// Reference models keyed by `(sentence, variant)`, then by speaker.
///
/// Enrolment needs `&mut Registry`; identification only borrows it, so any
/// number of readers may score concurrently between writes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    models: BTreeMap<(String, Variant), BTreeMap<String, SpeakerModel>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexRow {
    speaker: String,
    sentence: String,
    variant: Variant,
    path: String,
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
        return Err(Error::Config(format!("identifier {id:?} cannot be used as a file name")));
    }
    Ok(())
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces a speaker's model.
    pub fn insert(&mut self, model: SpeakerModel) {
        self.models
            .entry((model.sentence_id.clone(), model.variant))
            .or_default()
            .insert(model.speaker_id.clone(), model);
    }

    pub fn speakers(&self, sentence: &str, variant: Variant) -> Option<&BTreeMap<String, SpeakerModel>> {
        self.models
            .get(&(sentence.to_string(), variant))
            .filter(|m| !m.is_empty())
    }

    pub fn len(&self) -> usize {
        self.models.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &SpeakerModel> {
        self.models.values().flat_map(BTreeMap::values)
    }

    fn relative_path(model: &SpeakerModel) -> PathBuf {
        Path::new("models")
            .join(&model.sentence_id)
            .join(model.variant.name())
            .join(format!("{}.json", model.speaker_id))
    }

    /// Writes one JSON document per model and rewrites the index atomically.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let mut rows = Vec::new();
        for model in self.iter() {
            check_id(&model.speaker_id)?;
            check_id(&model.sentence_id)?;
            let rel = Self::relative_path(model);
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, model.to_json()?)?;
            rows.push(IndexRow {
                speaker: model.speaker_id.clone(),
                sentence: model.sentence_id.clone(),
                variant: model.variant,
                path: rel.to_string_lossy().replace('\\', "/"),
            });
        }
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!("{INDEX_FILE}.tmp"));
        {
            let mut w = csv::Writer::from_path(&tmp)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, dir.join(INDEX_FILE))?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut reader = csv::Reader::from_path(dir.join(INDEX_FILE))?;
        let mut registry = Registry::new();
        for row in reader.deserialize() {
            let row: IndexRow = row?;
            let text = fs::read_to_string(dir.join(&row.path))?;
            let model = SpeakerModel::from_json(&text)?;
            if model.speaker_id != row.speaker || model.sentence_id != row.sentence || model.variant != row.variant {
                return Err(Error::Document(format!("{} does not match its index entry", row.path)));
            }
            registry.insert(model);
        }
        Ok(registry)
    }
}
