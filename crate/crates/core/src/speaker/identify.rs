use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Utterance;
use crate::speaker::{Registry, Variant};
use crate::suprasegmental::{combined_log_score, derive_suprasegmental_obs, CombinedScore};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreOptions {
    /// Divide the acoustic score by the frame count and the prosodic score
    /// by the segment count.
    pub normalize_per_frame: bool,
}

/// Alpha-independent per-speaker log-likelihoods for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerScores {
    pub sentence_id: String,
    pub variant: Variant,
    /// `(speaker, acoustic log-likelihood, prosodic log-likelihood)`, by speaker id.
    pub scores: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSpeaker {
    pub speaker_id: String,
    pub score: CombinedScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    /// Descending by fused score; equal scores by ascending speaker id.
    pub ranked: Vec<RankedSpeaker>,
    pub winner: String,
    /// Fused gap between the first and second entries, if there are two.
    pub margin: Option<f64>,
    /// The winner's fused score is exactly shared with the runner-up.
    pub tie: bool,
}

/// Scores the utterance against every registered speaker for the sentence
/// and variant. Speakers are scored in parallel; the output order is fixed.
pub fn score_speakers(
    utterance: &Utterance,
    sentence_id: &str,
    variant: Variant,
    registry: &Registry,
    options: ScoreOptions,
) -> Result<SpeakerScores> {
    let models = registry.speakers(sentence_id, variant).ok_or_else(|| Error::NoModels {
        sentence: sentence_id.to_string(),
        variant: variant.to_string(),
    })?;
    let models: Vec<_> = models.values().collect();
    let scores = models
        .par_iter()
        .map(|model| {
            let frames = &utterance.observations.frames;
            let acoustic = model.acoustic.forward_log_likelihood(frames)?;
            let prosody = derive_suprasegmental_obs(&model.acoustic, model.suprasegmental.group_size, utterance)?;
            let prosodic = model.suprasegmental.log_likelihood(&prosody)?;
            Ok(if options.normalize_per_frame {
                (
                    model.speaker_id.clone(),
                    acoustic / frames.len() as f64,
                    prosodic / prosody.len() as f64,
                )
            } else {
                (model.speaker_id.clone(), acoustic, prosodic)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpeakerScores {
        sentence_id: sentence_id.to_string(),
        variant,
        scores,
    })
}

impl SpeakerScores {
    /// Fuses the cached scores with `alpha` and ranks the speakers.
    pub fn fuse(&self, alpha: f64) -> Result<IdentificationResult> {
        let mut ranked = self
            .scores
            .iter()
            .map(|(id, a, p)| {
                Ok(RankedSpeaker {
                    speaker_id: id.clone(),
                    score: combined_log_score(*a, *p, alpha)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if ranked.is_empty() {
            return Err(Error::NoModels {
                sentence: self.sentence_id.clone(),
                variant: self.variant.to_string(),
            });
        }
        if ranked.iter().any(|r| r.score.fused.is_nan()) {
            return Err(Error::Unscorable);
        }
        ranked.sort_by(|x, y| {
            y.score
                .fused
                .total_cmp(&x.score.fused)
                .then_with(|| x.speaker_id.cmp(&y.speaker_id))
        });
        if ranked.len() > 1 && ranked[0].score.fused == f64::NEG_INFINITY {
            return Err(Error::Unscorable);
        }
        let (margin, tie) = match ranked.get(1) {
            Some(second) => (
                Some(ranked[0].score.fused - second.score.fused),
                ranked[0].score.fused == second.score.fused,
            ),
            None => (None, false),
        };
        Ok(IdentificationResult {
            winner: ranked[0].speaker_id.clone(),
            ranked,
            margin,
            tie,
        })
    }
}

/// Closed-set identification among the speakers enrolled for the sentence.
pub fn identify(
    utterance: &Utterance,
    sentence_id: &str,
    variant: Variant,
    alpha: f64,
    registry: &Registry,
) -> Result<IdentificationResult> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    score_speakers(utterance, sentence_id, variant, registry, ScoreOptions::default())?.fuse(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(entries: &[(&str, f64, f64)]) -> SpeakerScores {
        SpeakerScores {
            sentence_id: "s1".into(),
            variant: Variant::Csphmm2,
            scores: entries.iter().map(|(s, a, p)| (s.to_string(), *a, *p)).collect(),
        }
    }

    #[test]
    fn hand_computed_winner_and_margin() {
        // A: 0.5*-100 + 0.5*-20 = -60; B: 0.5*-90 + 0.5*-50 = -70
        let r = scores(&[("B", -90.0, -50.0), ("A", -100.0, -20.0)]).fuse(0.5).unwrap();
        assert_eq!(r.winner, "A");
        assert_eq!(r.margin, Some(10.0));
        assert!(!r.tie);
        // acoustic only prefers B
        assert_eq!(scores(&[("B", -90.0, -50.0), ("A", -100.0, -20.0)]).fuse(0.0).unwrap().winner, "B");
        assert_eq!(scores(&[("B", -90.0, -50.0), ("A", -100.0, -20.0)]).fuse(1.0).unwrap().winner, "A");
    }

    #[test]
    fn singleton_wins_regardless() {
        let r = scores(&[("only", -1e9, -1e9)]).fuse(0.5).unwrap();
        assert_eq!(r.winner, "only");
        assert_eq!(r.margin, None);
        let r = scores(&[("only", f64::NEG_INFINITY, -1.0)]).fuse(0.5).unwrap();
        assert_eq!(r.winner, "only");
    }

    #[test]
    fn exact_tie_goes_to_lowest_id() {
        let r = scores(&[("zed", -5.0, -5.0), ("amy", -5.0, -5.0), ("bob", -7.0, -7.0)]).fuse(0.3).unwrap();
        assert_eq!(r.winner, "amy");
        assert!(r.tie);
        assert_eq!(r.margin, Some(0.0));
    }

    #[test]
    fn all_negative_infinity_is_unscorable() {
        let err = scores(&[("a", f64::NEG_INFINITY, -1.0), ("b", f64::NEG_INFINITY, -2.0)])
            .fuse(0.5)
            .unwrap_err();
        assert!(matches!(err, Error::Unscorable));
    }

    #[test]
    fn permutation_invariance() {
        let base = [("a", -10.0, -3.0), ("b", -12.0, -1.0), ("c", -11.0, -2.5), ("d", -9.5, -6.0)];
        let reference = scores(&base).fuse(0.4).unwrap();
        let mut perm = base;
        for k in 0..8 {
            perm.rotate_left(1);
            if k % 3 == 0 {
                perm.swap(0, 2);
            }
            let r = scores(&perm).fuse(0.4).unwrap();
            assert_eq!(r.winner, reference.winner);
            assert_eq!(r.margin, reference.margin);
            assert_eq!(r.ranked, reference.ranked);
        }
    }
}
