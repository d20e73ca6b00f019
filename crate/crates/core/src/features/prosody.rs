use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::frame::seconds_to_samples;
use crate::features::pitch::PitchEstimator;

/// Number of components in a [`ProsodicVector`].
pub const PROSODIC_DIM: usize = 5;

/// Segment-level prosody.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProsodicVector {
    /// Mean F0 over voiced frames in Hz, 0 when the segment is unvoiced.
    pub f0_mean: f64,
    /// Least-squares F0 slope over voiced frames in Hz/s.
    pub f0_slope: f64,
    /// Mean natural-log frame energy.
    pub log_energy_mean: f64,
    /// Seconds.
    pub duration: f64,
    /// Segments per second over the whole utterance.
    pub speaking_rate: f64,
}

impl ProsodicVector {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.f0_mean,
            self.f0_slope,
            self.log_energy_mean,
            self.duration,
            self.speaking_rate,
        ]
    }
}

pub type ProsodicSequence = Vec<ProsodicVector>;

/// Per-frame F0 and log energy, aligned with the acoustic frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProsody {
    pub f0: Vec<f64>,
    pub log_energy: Vec<f64>,
    pub hop: f64,
}

impl FrameProsody {
    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    /// Tracks F0 with a window long enough for the pitch search, centred on
    /// each acoustic frame, and log energy over the acoustic frame itself.
    pub fn compute(
        signal: &[f64],
        sample_rate: u32,
        frame_len: f64,
        frame_hop: f64,
        num_frames: usize,
        pitch: &PitchEstimator,
        log_floor: f64,
    ) -> Result<Self> {
        let win = seconds_to_samples(frame_len, sample_rate);
        let hop = seconds_to_samples(frame_hop, sample_rate);
        let pitch_win = pitch.params().min_frame_len(sample_rate).max(win);
        let mut f0 = Vec::with_capacity(num_frames);
        let mut log_energy = Vec::with_capacity(num_frames);
        for t in 0..num_frames {
            let start = t * hop;
            let frame = &signal[start..(start + win).min(signal.len())];
            let ms = frame.iter().map(|x| x * x).sum::<f64>() / frame.len().max(1) as f64;
            log_energy.push(ms.max(log_floor).ln());

            if signal.len() < pitch_win {
                f0.push(0.0);
                continue;
            }
            let centre = start + win / 2;
            let p_start = centre.saturating_sub(pitch_win / 2).min(signal.len() - pitch_win);
            f0.push(pitch.estimate(&signal[p_start..p_start + pitch_win], sample_rate)?);
        }
        Ok(Self {
            f0,
            log_energy,
            hop: frame_hop,
        })
    }

    /// One prosodic vector per segment. `boundaries` holds strictly
    /// increasing cut points `0 = b0 < b1 < ... < bK = len`.
    pub fn segment(&self, boundaries: &[usize]) -> Result<ProsodicSequence> {
        validate_boundaries(boundaries, self.len())?;
        let segments = boundaries.len() - 1;
        let total = self.len() as f64 * self.hop;
        let rate = segments as f64 / total;
        Ok(boundaries
            .windows(2)
            .map(|w| {
                let (start, end) = (w[0], w[1]);
                let voiced: Vec<(f64, f64)> = (start..end)
                    .filter(|&t| self.f0[t] > 0.0)
                    .map(|t| (t as f64 * self.hop, self.f0[t]))
                    .collect();
                let (f0_mean, f0_slope) = f0_stats(&voiced);
                let log_energy_mean =
                    self.log_energy[start..end].iter().sum::<f64>() / (end - start) as f64;
                ProsodicVector {
                    f0_mean,
                    f0_slope,
                    log_energy_mean,
                    duration: (end - start) as f64 * self.hop,
                    speaking_rate: rate,
                }
            })
            .collect())
    }
}

fn validate_boundaries(boundaries: &[usize], frames: usize) -> Result<()> {
    if boundaries.len() < 2 {
        return Err(Error::Segmentation("need at least one segment".into()));
    }
    if boundaries[0] != 0 || *boundaries.last().unwrap() != frames {
        return Err(Error::Segmentation(format!(
            "boundaries must span 0..{frames}, got {:?}..{:?}",
            boundaries.first(),
            boundaries.last()
        )));
    }
    if let Some(w) = boundaries.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Segmentation(format!(
            "empty segment between frames {} and {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn f0_stats(voiced: &[(f64, f64)]) -> (f64, f64) {
    if voiced.is_empty() {
        return (0.0, 0.0);
    }
    let n = voiced.len() as f64;
    let mean_t = voiced.iter().map(|v| v.0).sum::<f64>() / n;
    let mean_f = voiced.iter().map(|v| v.1).sum::<f64>() / n;
    if voiced.len() < 2 {
        return (mean_f, 0.0);
    }
    let sxy: f64 = voiced.iter().map(|(t, f)| (t - mean_t) * (f - mean_f)).sum();
    let sxx: f64 = voiced.iter().map(|(t, _)| (t - mean_t).powi(2)).sum();
    (mean_f, if sxx > 0.0 { sxy / sxx } else { 0.0 })
}
