use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Autocorrelation F0 search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchParams {
    pub f0_min: f64,
    pub f0_max: f64,
    pub voicing_threshold: f64,
}

impl Default for PitchParams {
    fn default() -> Self {
        Self {
            f0_min: 60.0,
            f0_max: 400.0,
            voicing_threshold: 0.3,
        }
    }
}

impl PitchParams {
    /// Shortest frame that holds two periods of the lowest F0.
    pub fn min_frame_len(&self, sample_rate: u32) -> usize {
        (2.0 * sample_rate as f64 / self.f0_min).ceil() as usize
    }
}

/// Forward and inverse plans for one padded length.
type FftPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Normalised-autocorrelation pitch estimator. Returns 0.0 for unvoiced frames.
pub struct PitchEstimator {
    params: PitchParams,
    plans: Mutex<HashMap<usize, FftPair>>,
}

impl PitchEstimator {
    pub fn new(params: PitchParams) -> Self {
        Self {
            params,
            plans: Mutex::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> &PitchParams {
        &self.params
    }

    fn plans(&self, n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut plans = self.plans.lock().unwrap();
        plans
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    }

    /// Raw autocorrelation `sum_n x[n] x[n+lag]` for lags `0..=max_lag`.
    fn autocorrelation(&self, x: &[f64], max_lag: usize) -> Vec<f64> {
        let n = (x.len() + max_lag + 1).next_power_of_two();
        let (fwd, inv) = self.plans(n);
        let mut buf: Vec<Complex<f64>> = x
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(n)
            .collect();
        fwd.process(&mut buf);
        buf.iter_mut().for_each(|c| *c = Complex::new(c.norm_sqr(), 0.0));
        inv.process(&mut buf);
        buf[..=max_lag].iter().map(|c| c.re / n as f64).collect()
    }

    pub fn estimate(&self, frame: &[f64], sample_rate: u32) -> Result<f64> {
        let needed = self.params.min_frame_len(sample_rate);
        if frame.len() < needed {
            return Err(Error::SignalTooShort {
                samples: frame.len(),
                needed,
            });
        }
        let mean = frame.iter().sum::<f64>() / frame.len() as f64;
        let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        if energy <= 1e-12 * x.len() as f64 {
            return Ok(0.0);
        }

        let sr = sample_rate as f64;
        let min_lag = ((sr / self.params.f0_max).floor() as usize).max(2);
        let max_lag = ((sr / self.params.f0_min).ceil() as usize).min(x.len() / 2);
        let raw = self.autocorrelation(&x, max_lag + 1);

        // prefix[i] = sum of x[..i]^2
        let mut prefix = Vec::with_capacity(x.len() + 1);
        prefix.push(0.0);
        for v in &x {
            prefix.push(prefix.last().unwrap() + v * v);
        }
        let len = x.len();
        let norm = |lag: usize| {
            let head = prefix[len - lag];
            let tail = prefix[len] - prefix[lag];
            let d = (head * tail).sqrt();
            if d > 0.0 {
                raw[lag] / d
            } else {
                0.0
            }
        };
        let r: Vec<f64> = (0..=max_lag + 1).map(|lag| if lag == 0 { 1.0 } else { norm(lag) }).collect();

        let best = (min_lag..=max_lag).map(|l| r[l]).fold(f64::NEG_INFINITY, f64::max);
        if best < self.params.voicing_threshold {
            return Ok(0.0);
        }
        // shortest lag whose peak is close to the best one avoids sub-octave picks
        let lag = (min_lag..=max_lag)
            .find(|&l| r[l] >= 0.9 * best && r[l] >= r[l - 1] && r[l] >= r[l + 1])
            .unwrap_or_else(|| {
                (min_lag..=max_lag)
                    .max_by(|&a, &b| r[a].total_cmp(&r[b]))
                    .unwrap()
            });
        let (a, b, c) = (r[lag - 1], r[lag], r[lag + 1]);
        let curvature = a - 2.0 * b + c;
        let offset = if curvature < 0.0 {
            (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let f0 = sr / (lag as f64 + offset);
        if f0 < self.params.f0_min || f0 > self.params.f0_max {
            return Ok(0.0);
        }
        Ok(f0)
    }
}

/// Convenience wrapper with default search parameters.
pub fn estimate_f0(frame: &[f64], sample_rate: u32) -> Result<f64> {
    PitchEstimator::new(PitchParams::default()).estimate(frame, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sine(freq: f64, len: usize) -> Vec<f64> {
        (0..len)
            .map(|n| 0.5 * (2.0 * PI * freq * n as f64 / 16_000.0).sin())
            .collect()
    }

    #[test]
    fn tone_200hz() {
        let f0 = estimate_f0(&sine(200.0, 640), 16_000).unwrap();
        assert!((f0 - 200.0).abs() <= 2.0, "{f0}");
    }

    #[test]
    fn noise_and_silence_are_unvoiced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..640).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert_eq!(estimate_f0(&noise, 16_000).unwrap(), 0.0);
        assert_eq!(estimate_f0(&vec![0.0; 640], 16_000).unwrap(), 0.0);
    }

    #[test]
    fn short_frame_rejected() {
        assert!(estimate_f0(&vec![0.1; 400], 16_000).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pure_tones_within_two_hz(freq in 80.0f64..350.0) {
            let f0 = estimate_f0(&sine(freq, 640), 16_000).unwrap();
            prop_assert!((f0 - freq).abs() <= 2.0, "{} vs {}", f0, freq);
        }
    }
}
