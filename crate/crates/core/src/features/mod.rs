//! Audio front end: framing, MFCC and delta features, F0 tracking and
//! segment-level prosody.

mod audio;
pub mod delta;
pub mod frame;
pub mod mfcc;
pub mod pitch;
pub mod prosody;

use serde::{Deserialize, Serialize};

pub use audio::{check_wav_header, AudioBuffer, PROTOCOL_SAMPLE_RATE};
pub use delta::compute_delta;
pub use frame::{frame_signal, hamming};
pub use mfcc::{compute_mfcc, MfccExtractor};
pub use pitch::{estimate_f0, PitchEstimator, PitchParams};
pub use prosody::{FrameProsody, ProsodicSequence, ProsodicVector, PROSODIC_DIM};

use crate::error::Result;

/// Front-end settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontendConfig {
    pub frame_len: f64,
    pub frame_hop: f64,
    pub num_filters: usize,
    pub num_ceps: usize,
    pub delta_width: usize,
    pub log_floor: f64,
    pub pre_emphasis: bool,
    pub pre_emphasis_coef: f64,
    pub f0_min: f64,
    pub f0_max: f64,
    pub voicing_threshold: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            frame_len: 0.030,
            frame_hop: 0.005,
            num_filters: 26,
            num_ceps: 16,
            delta_width: 2,
            log_floor: 1e-10,
            pre_emphasis: false,
            pre_emphasis_coef: 0.97,
            f0_min: 60.0,
            f0_max: 400.0,
            voicing_threshold: 0.3,
        }
    }
}

/// Frame-level acoustic observations: static MFCCs followed by their deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSequence {
    pub frames: Vec<Vec<f64>>,
    pub frame_hop: f64,
    pub frame_len: f64,
}

impl ObservationSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }
}

/// Both observation streams for one recording.
#[derive(Debug, Clone)]
pub struct Utterance {
    pub observations: ObservationSequence,
    pub prosody: FrameProsody,
}

/// Turns audio into [`Utterance`]s. Holds precomputed filterbank and FFT plans.
pub struct Frontend {
    config: FrontendConfig,
    sample_rate: u32,
    mfcc: MfccExtractor,
    pitch: PitchEstimator,
}

impl Frontend {
    pub fn new(config: FrontendConfig, sample_rate: u32) -> Self {
        let win = frame::seconds_to_samples(config.frame_len, sample_rate);
        let mfcc = MfccExtractor::new(
            win,
            sample_rate,
            config.num_filters,
            config.num_ceps,
            config.log_floor,
        );
        let pitch = PitchEstimator::new(PitchParams {
            f0_min: config.f0_min,
            f0_max: config.f0_max,
            voicing_threshold: config.voicing_threshold,
        });
        Self {
            config,
            sample_rate,
            mfcc,
            pitch,
        }
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.config
    }

    pub fn observations(&self, audio: &AudioBuffer) -> Result<ObservationSequence> {
        let signal = audio.to_f64();
        self.observations_from(&signal, audio.sample_rate)
    }

    fn observations_from(&self, signal: &[f64], sample_rate: u32) -> Result<ObservationSequence> {
        let frames = frame::frame_samples(
            signal,
            sample_rate,
            self.config.frame_len,
            self.config.frame_hop,
            self.config.pre_emphasis.then_some(self.config.pre_emphasis_coef),
        )?;
        let statics = compute_mfcc(&self.mfcc, &frames);
        let deltas = compute_delta(&statics, self.config.delta_width)?;
        let frames = statics
            .into_iter()
            .zip(deltas)
            .map(|(mut s, d)| {
                s.extend(d);
                s
            })
            .collect();
        Ok(ObservationSequence {
            frames,
            frame_hop: self.config.frame_hop,
            frame_len: self.config.frame_len,
        })
    }

    pub fn frame_prosody(&self, audio: &AudioBuffer, num_frames: usize) -> Result<FrameProsody> {
        FrameProsody::compute(
            &audio.to_f64(),
            audio.sample_rate,
            self.config.frame_len,
            self.config.frame_hop,
            num_frames,
            &self.pitch,
            self.config.log_floor,
        )
    }

    pub fn utterance(&self, audio: &AudioBuffer) -> Result<Utterance> {
        if audio.sample_rate != self.sample_rate {
            log::warn!(
                "audio at {} Hz processed by a front end configured for {} Hz",
                audio.sample_rate,
                self.sample_rate
            );
        }
        let signal = audio.to_f64();
        let observations = self.observations_from(&signal, audio.sample_rate)?;
        let prosody = FrameProsody::compute(
            &signal,
            audio.sample_rate,
            self.config.frame_len,
            self.config.frame_hop,
            observations.len(),
            &self.pitch,
            self.config.log_floor,
        )?;
        Ok(Utterance {
            observations,
            prosody,
        })
    }

    /// One [`ProsodicVector`] per segment between consecutive frame cut points.
    pub fn prosodic_features(&self, audio: &AudioBuffer, boundaries: &[usize]) -> Result<ProsodicSequence> {
        let num_frames = *boundaries.last().unwrap_or(&0);
        self.frame_prosody(audio, num_frames)?.segment(boundaries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, seconds: f64) -> Vec<i16> {
        let n = (seconds * 16_000.0) as usize;
        (0..n)
            .map(|i| (8000.0 * (2.0 * PI * freq * i as f64 / 16_000.0).sin()) as i16)
            .collect()
    }

    #[test]
    fn observations_are_32_dim_and_finite() {
        let fe = Frontend::new(FrontendConfig::default(), 16_000);
        let audio = AudioBuffer::new(tone(220.0, 0.3), 16_000).unwrap();
        let u = fe.utterance(&audio).unwrap();
        assert_eq!(u.observations.len(), (4800 - 480) / 80 + 1);
        assert!(u.observations.frames.iter().all(|f| f.len() == 32 && f.iter().all(|x| x.is_finite())));
        assert_eq!(u.prosody.len(), u.observations.len());
    }

    #[test]
    fn two_tone_segments() {
        let fe = Frontend::new(FrontendConfig::default(), 16_000);
        let mut samples = tone(200.0, 0.5);
        samples.extend(tone(300.0, 0.5));
        let audio = AudioBuffer::new(samples, 16_000).unwrap();
        let frames = fe.observations(&audio).unwrap().len();
        let mid = frames / 2;
        let p = fe.prosodic_features(&audio, &[0, mid, frames]).unwrap();
        assert!((p[0].f0_mean - 200.0).abs() < 5.0, "{}", p[0].f0_mean);
        assert!((p[1].f0_mean - 300.0).abs() < 5.0, "{}", p[1].f0_mean);
        let total: f64 = p.iter().map(|v| v.duration).sum();
        assert!((total - frames as f64 * 0.005).abs() < 1e-12);
    }
}
