use std::path::Path;

use crate::corpus::CorpusManifest;
use crate::error::{Error, Result};
use crate::features::{check_wav_header, PROTOCOL_SAMPLE_RATE};

/// Result of a successful ingest.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub manifest: CorpusManifest,
    pub warnings: Vec<String>,
}

/// Reads a manifest and checks that every row points at a readable 16-bit
/// mono WAV under `root` and that no key repeats. All problems are reported
/// together.
pub fn ingest_corpus(root: impl AsRef<Path>, manifest_file: impl AsRef<Path>) -> Result<Ingested> {
    let root = root.as_ref();
    let manifest = CorpusManifest::read_csv(manifest_file)?;
    if manifest.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let mut problems = Vec::new();
    let mut warnings = Vec::new();
    for entry in &manifest.entries {
        let path = root.join(&entry.path);
        if !path.is_file() {
            problems.push(format!("{}: file not found", entry.path));
            continue;
        }
        match check_wav_header(&path) {
            Ok(spec) if spec.sample_rate != PROTOCOL_SAMPLE_RATE => warnings.push(format!(
                "{}: sample rate {} Hz (expected {PROTOCOL_SAMPLE_RATE})",
                entry.path, spec.sample_rate
            )),
            Ok(_) => {}
            Err(e) => problems.push(format!("{}: {e}", entry.path)),
        }
    }
    for key in manifest.duplicates() {
        problems.push(format!("duplicate entry {key:?}"));
    }
    if problems.is_empty() {
        Ok(Ingested { manifest, warnings })
    } else {
        Err(Error::Manifest(problems))
    }
}
