//! Enrolment of per-sentence reference models and closed-set,
//! text-dependent identification.

mod identify;
mod model;
mod registry;
mod variant;

pub use identify::{identify, score_speakers, IdentificationResult, RankedSpeaker, ScoreOptions, SpeakerScores};
pub use model::{enroll, enroll_all, EnrollConfig, Enrollment, EnrollmentGroup, SpeakerModel, MODEL_FORMAT, MODEL_VERSION};
pub use registry::{Registry, INDEX_FILE};
pub use variant::Variant;
