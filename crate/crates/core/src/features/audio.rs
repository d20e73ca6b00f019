use std::path::Path;

use hound::{SampleFormat, WavSpec, WavWriter};
use log::warn;

use crate::error::{Error, Result};

/// Sample rate the front end is tuned for.
pub const PROTOCOL_SAMPLE_RATE: u32 = 16_000;

/// Mono 16-bit PCM audio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioBuffer {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidModel("sample rate must be positive".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Samples scaled to [-1, 1).
    pub fn to_f64(&self) -> Vec<f64> {
        self.samples.iter().map(|&s| s as f64 / 32768.0).collect()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let ss: f64 = self.to_f64().iter().map(|x| x * x).sum();
        (ss / self.samples.len() as f64).sqrt()
    }

    /// Reads a RIFF WAV file. Only 16-bit integer mono input is accepted.
    pub fn read_wav(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = hound::WavReader::open(path)?;
        let spec = reader.spec();
        check_spec(path, &spec)?;
        if spec.sample_rate != PROTOCOL_SAMPLE_RATE {
            warn!(
                "{}: sample rate {} Hz differs from the expected {} Hz",
                path.display(),
                spec.sample_rate,
                PROTOCOL_SAMPLE_RATE
            );
        }
        let samples = reader
            .into_samples::<i16>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(samples, spec.sample_rate)
    }

    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        let spec = WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut writer = WavWriter::create(path, spec)?;
        let mut w = writer.get_i16_writer(self.samples.len() as u32);
        for &s in &self.samples {
            w.write_sample(s);
        }
        w.flush()?;
        writer.finalize()?;
        Ok(())
    }
}

/// Validates a WAV header without decoding the payload.
pub fn check_wav_header(path: impl AsRef<Path>) -> Result<WavSpec> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    check_spec(path, &spec)?;
    Ok(spec)
}

fn check_spec(path: &Path, spec: &WavSpec) -> Result<()> {
    if spec.channels != 1 {
        return Err(Error::UnsupportedWav {
            path: path.to_path_buf(),
            reason: format!("expected mono, found {} channels", spec.channels),
        });
    }
    if spec.bits_per_sample != 16 || spec.sample_format != SampleFormat::Int {
        return Err(Error::UnsupportedWav {
            path: path.to_path_buf(),
            reason: format!(
                "expected 16-bit integer PCM, found {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    Ok(())
}
