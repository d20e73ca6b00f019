use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::features::AudioBuffer;

/// Symmetric Hamming window of length `len`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

/// Converts a duration in seconds to a whole number of samples.
pub fn seconds_to_samples(seconds: f64, sample_rate: u32) -> usize {
    (seconds * sample_rate as f64).round() as usize
}

/// Number of full frames of `win` samples spaced `hop` apart in `len` samples.
pub fn frame_count(len: usize, win: usize, hop: usize) -> usize {
    if len < win || hop == 0 {
        0
    } else {
        (len - win) / hop + 1
    }
}

/// Splits the signal into overlapping Hamming-windowed frames.
pub fn frame_signal(audio: &AudioBuffer, frame_len: f64, frame_hop: f64) -> Result<Vec<Vec<f64>>> {
    let signal = audio.to_f64();
    frame_samples(&signal, audio.sample_rate, frame_len, frame_hop, None)
}

pub(crate) fn frame_samples(
    signal: &[f64],
    sample_rate: u32,
    frame_len: f64,
    frame_hop: f64,
    pre_emphasis: Option<f64>,
) -> Result<Vec<Vec<f64>>> {
    let win = seconds_to_samples(frame_len, sample_rate).max(1);
    let hop = seconds_to_samples(frame_hop, sample_rate).max(1);
    if signal.len() < win {
        return Err(Error::SignalTooShort {
            samples: signal.len(),
            needed: win,
        });
    }
    let emphasized;
    let signal = match pre_emphasis {
        Some(coef) => {
            emphasized = std::iter::once(signal[0])
                .chain(signal.windows(2).map(|w| w[1] - coef * w[0]))
                .collect::<Vec<_>>();
            &emphasized[..]
        }
        None => signal,
    };
    let window = hamming(win);
    let count = frame_count(signal.len(), win, hop);
    Ok((0..count)
        .map(|f| {
            let start = f * hop;
            signal[start..start + win]
                .iter()
                .zip(&window)
                .map(|(x, w)| x * w)
                .collect()
        })
        .collect())
}
