use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale, evaluated at the
/// centre frequency of each rfft bin. Row-major, `num_filters x (nfft/2+1)`.
pub fn mel_filterbank(
    num_filters: usize,
    nfft: usize,
    sample_rate: u32,
    low_hz: f64,
    high_hz: f64,
) -> Vec<Vec<f64>> {
    let bins = nfft / 2 + 1;
    let lo = hz_to_mel(low_hz);
    let hi = hz_to_mel(high_hz);
    let edges: Vec<f64> = (0..num_filters + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (num_filters + 1) as f64))
        .collect();
    (0..num_filters)
        .map(|m| {
            let (left, centre, right) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * sample_rate as f64 / nfft as f64;
                    if f <= left || f >= right {
                        0.0
                    } else if f <= centre {
                        (f - left) / (centre - left)
                    } else {
                        (right - f) / (right - centre)
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II basis truncated to `num_ceps` rows.
pub fn dct_matrix(num_ceps: usize, num_filters: usize) -> Vec<Vec<f64>> {
    let m = num_filters as f64;
    (0..num_ceps)
        .map(|k| {
            let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            (0..num_filters)
                .map(|n| scale * (PI * k as f64 * (n as f64 + 0.5) / m).cos())
                .collect()
        })
        .collect()
}

/// Power spectrum, mel filterbank, log, DCT-II.
///
/// `c0` is kept and carries the log-energy term.
pub struct MfccExtractor {
    nfft: usize,
    fft: Arc<dyn Fft<f64>>,
    filterbank: Vec<Vec<f64>>,
    dct: Vec<Vec<f64>>,
    log_floor: f64,
}

impl MfccExtractor {
    pub fn new(
        frame_len: usize,
        sample_rate: u32,
        num_filters: usize,
        num_ceps: usize,
        log_floor: f64,
    ) -> Self {
        let nfft = frame_len.next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        let filterbank = mel_filterbank(num_filters, nfft, sample_rate, 0.0, sample_rate as f64 / 2.0);
        let dct = dct_matrix(num_ceps, num_filters);
        Self {
            nfft,
            fft,
            filterbank,
            dct,
            log_floor,
        }
    }

    pub fn num_ceps(&self) -> usize {
        self.dct.len()
    }

    pub fn power_spectrum(&self, frame: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = frame
            .iter()
            .map(|&x| Complex::new(x, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(self.nfft)
            .collect();
        self.fft.process(&mut buf);
        buf[..self.nfft / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
    }

    /// Floored log filterbank energies.
    pub fn log_mel_energies(&self, frame: &[f64]) -> Vec<f64> {
        let power = self.power_spectrum(frame);
        self.filterbank
            .iter()
            .map(|filter| {
                let e: f64 = filter.iter().zip(&power).map(|(w, p)| w * p).sum();
                e.max(self.log_floor).ln()
            })
            .collect()
    }

    pub fn compute(&self, frame: &[f64]) -> Vec<f64> {
        let log_e = self.log_mel_energies(frame);
        self.dct
            .iter()
            .map(|row| row.iter().zip(&log_e).map(|(c, e)| c * e).sum())
            .collect()
    }
}

/// Static MFCCs for each windowed frame.
pub fn compute_mfcc(extractor: &MfccExtractor, frames: &[Vec<f64>]) -> Vec<Vec<f64>> {
    frames.iter().map(|f| extractor.compute(f)).collect()
}
