use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Utterance;
use crate::hmm::{EmConfig, Hmm, TopologySpec, TrainReport};
use crate::speaker::{Registry, Variant};
use crate::suprasegmental::{train_suprasegmental, SuprasegmentalConfig, SuprasegmentalHmm};

pub const MODEL_FORMAT: &str = "sphmm-speaker-model";
pub const MODEL_VERSION: u32 = 1;

/// Reference model of one speaker for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerModel {
    pub speaker_id: String,
    pub sentence_id: String,
    pub variant: Variant,
    pub acoustic: Hmm,
    pub suprasegmental: SuprasegmentalHmm,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: SpeakerModel,
}

impl SpeakerModel {
    pub fn validate(&self) -> Result<()> {
        let (kind, order) = (self.variant.kind(), self.variant.order());
        for (name, t) in [
            ("acoustic", &self.acoustic.topology),
            ("suprasegmental", &self.suprasegmental.model.topology),
        ] {
            if t.kind != kind || t.order != order {
                return Err(Error::InvalidModel(format!(
                    "{name} model is {:?} order {} but the variant is {}",
                    t.kind, t.order, self.variant
                )));
            }
        }
        self.acoustic.validate()?;
        self.suprasegmental.model.validate()?;
        if self.acoustic.num_states() != self.suprasegmental.num_states() * self.suprasegmental.group_size {
            return Err(Error::InvalidModel("suprasegmental grouping does not cover the acoustic states".into()));
        }
        Ok(())
    }

    /// Versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Document(format!("unexpected format {:?}", doc.format)));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::Document(format!("unsupported version {}", doc.version)));
        }
        doc.model.validate()?;
        Ok(doc.model)
    }
}

/// Training settings for both layers of a reference model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnrollConfig {
    pub num_states: usize,
    pub mixtures: usize,
    pub var_floor: f64,
    pub em: EmConfig,
    pub suprasegmental: SuprasegmentalConfig,
    pub seed: u64,
}

impl Default for EnrollConfig {
    fn default() -> Self {
        Self {
            num_states: 9,
            mixtures: 4,
            var_floor: 1e-4,
            em: EmConfig::default(),
            suprasegmental: SuprasegmentalConfig::default(),
            seed: 20100101,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Enrollment {
    pub model: SpeakerModel,
    pub acoustic_report: TrainReport,
    pub suprasegmental_report: TrainReport,
}

/// Trains the acoustic model, then the suprasegmental model on top of it.
pub fn enroll(
    speaker_id: &str,
    sentence_id: &str,
    variant: Variant,
    utterances: &[&Utterance],
    config: &EnrollConfig,
) -> Result<Enrollment> {
    if utterances.is_empty() {
        return Err(Error::Training(format!(
            "no training utterances for speaker {speaker_id:?}, sentence {sentence_id:?}"
        )));
    }
    let spec = TopologySpec::new(variant.kind(), variant.order(), config.num_states)?;
    let frames: Vec<&[Vec<f64>]> = utterances.iter().map(|u| u.observations.frames.as_slice()).collect();
    let mut acoustic = Hmm::initialize(spec, &frames, config.mixtures, config.var_floor, config.seed)?;
    let acoustic_report = acoustic.train_em(&frames, &config.em).map_err(|e| {
        Error::Training(format!("acoustic model for {speaker_id}/{sentence_id}/{variant}: {e}"))
    })?;
    let (suprasegmental, suprasegmental_report) =
        train_suprasegmental(&acoustic, utterances, &config.suprasegmental, config.seed)?;
    let model = SpeakerModel {
        speaker_id: speaker_id.to_string(),
        sentence_id: sentence_id.to_string(),
        variant,
        acoustic,
        suprasegmental,
    };
    Ok(Enrollment {
        model,
        acoustic_report,
        suprasegmental_report,
    })
}

/// Training material for one (speaker, sentence) reference model.
#[derive(Debug, Clone)]
pub struct EnrollmentGroup<'a> {
    pub speaker_id: String,
    pub sentence_id: String,
    pub utterances: Vec<&'a Utterance>,
}

/// Enrolls every group for `variant` in parallel. Returns the registry and
/// any training warnings, prefixed with the group they came from.
pub fn enroll_all(
    groups: &[EnrollmentGroup<'_>],
    variant: Variant,
    config: &EnrollConfig,
) -> Result<(Registry, Vec<String>)> {
    let enrolled = groups
        .par_iter()
        .map(|g| enroll(&g.speaker_id, &g.sentence_id, variant, &g.utterances, config))
        .collect::<Result<Vec<_>>>()?;
    let mut registry = Registry::new();
    let mut warnings = Vec::new();
    for e in enrolled {
        let tag = format!("{}/{}/{}", e.model.speaker_id, e.model.sentence_id, variant);
        for w in e.acoustic_report.warnings.iter().chain(&e.suprasegmental_report.warnings) {
            warnings.push(format!("{tag}: {w}"));
        }
        registry.insert(e.model);
    }
    Ok((registry, warnings))
}
