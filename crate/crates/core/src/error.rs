use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signal too short: {samples} samples, need at least {needed}")]
    SignalTooShort { samples: usize, needed: usize },

    #[error("too few frames: {frames}, need at least {needed}")]
    TooFewFrames { frames: usize, needed: usize },

    #[error("invalid segmentation: {0}")]
    Segmentation(String),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("empty observation sequence")]
    EmptySequence,

    #[error("training failed: {0}")]
    Training(String),

    #[error("insufficient prosodic evidence: {0}")]
    InsufficientProsody(String),

    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("no models registered for sentence {sentence:?} and variant {variant}")]
    NoModels { sentence: String, variant: String },

    #[error("utterance unscorable: every speaker scored -inf")]
    Unscorable,

    #[error("invalid statistics input: {0}")]
    Stats(String),

    #[error("corpus too small: {0}")]
    CorpusTooSmall(String),

    #[error("manifest has no entries")]
    EmptyManifest,

    #[error("manifest validation failed:\n{}", .0.join("\n"))]
    Manifest(Vec<String>),

    #[error("unsupported wav {path}: {reason}")]
    UnsupportedWav { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("model document: {0}")]
    Document(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
