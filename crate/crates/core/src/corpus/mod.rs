//! Corpus manifests, WAV ingestion and the synthetic corpus generator.

mod ingest;
mod manifest;
pub mod synth;

use std::path::Path;

use rayon::prelude::*;

pub use ingest::{ingest_corpus, Ingested};
pub use manifest::{CorpusManifest, EntryKey, Environment, Gender, ManifestEntry, ProtocolCounts, Session};
pub use synth::{plan_manifest, synth_corpus, ShoutTransform, SynthConfig, SyntheticVoiceSpec, TakeJitter, VoiceSpread, MANIFEST_FILE};

use crate::error::{Error, Result};
use crate::features::{AudioBuffer, Frontend, Utterance};

/// Reads and featurizes every entry, in manifest order.
pub fn load_utterances(root: impl AsRef<Path>, entries: &[ManifestEntry], frontend: &Frontend) -> Result<Vec<Utterance>> {
    let root = root.as_ref();
    entries
        .par_iter()
        .map(|e| {
            let audio = AudioBuffer::read_wav(root.join(&e.path))?;
            frontend
                .utterance(&audio)
                .map_err(|err| Error::Document(format!("{}: {err}", e.path)))
        })
        .collect()
}
