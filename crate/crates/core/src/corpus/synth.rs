//! Source-filter speech synthesizer used to stand in for recorded corpora.
//!
//! A voice is a glottal pulse train (Rosenberg shape) passed through a
//! one-pole spectral tilt and a cascade of second-order formant resonators.
//! Sentences are fixed scripts of vowel-like and fricative phones, so the
//! same sentence id always produces the same phone sequence for every voice.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusManifest, Environment, Gender, ManifestEntry, ProtocolCounts, Session};
use crate::error::{Error, Result};
use crate::features::{AudioBuffer, PROTOCOL_SAMPLE_RATE};

/// How a voice changes when shouting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShoutTransform {
    pub f0_scale: f64,
    pub energy_gain_db: f64,
    pub duration_scale: f64,
    /// Subtracted from the tilt pole; positive values flatten the spectrum.
    pub spectral_tilt_shift: f64,
}

impl Default for ShoutTransform {
    fn default() -> Self {
        Self {
            f0_scale: 1.5,
            energy_gain_db: 12.0,
            duration_scale: 0.8,
            spectral_tilt_shift: 0.3,
        }
    }
}

impl ShoutTransform {
    pub fn validate(&self) -> Result<()> {
        if !(self.f0_scale > 1.0 && self.energy_gain_db > 0.0 && self.duration_scale > 0.0 && self.duration_scale < 1.0) {
            return Err(Error::Config(format!(
                "shout transform must raise F0 and energy and shorten duration, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticVoiceSpec {
    pub gender: Gender,
    pub base_f0: f64,
    /// Neutral-vowel resonances F1..F4 in Hz.
    pub formant_profile: Vec<f64>,
    /// Linear gain relative to the nominal level.
    pub energy: f64,
    /// Multiplies every phone duration; above 1 is slower.
    pub tempo: f64,
    /// Relative F0 at the start of the utterance and at each third.
    pub contour: [f64; 4],
    /// Duration scale per third of the utterance.
    pub rhythm: [f64; 3],
    /// Pole of the one-pole lowpass applied to the source.
    pub tilt: f64,
    /// Aspiration noise mixed into voiced excitation.
    pub breathiness: f64,
    pub shout_transform: ShoutTransform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phone {
    /// Resonance multipliers relative to the speaker's neutral vowel;
    /// unused for fricatives.
    pub formant_scale: [f64; 3],
    pub voiced: bool,
    /// Centre frequency of the frication noise in Hz.
    pub frication: f64,
    /// Nominal duration in seconds.
    pub duration: f64,
}

/// Phone script for one sentence id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScript {
    pub phones: Vec<Phone>,
}

/// Per-take variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TakeJitter {
    pub f0: f64,
    pub formants: f64,
    pub tempo: f64,
    pub energy_db: f64,
    pub contour: f64,
    pub phone_duration: f64,
    /// Independent relative jitter of every phone's formant targets.
    pub phone_formants: f64,
}

impl Default for TakeJitter {
    fn default() -> Self {
        Self {
            f0: 0.02,
            formants: 0.01,
            tempo: 0.03,
            energy_db: 0.5,
            contour: 0.02,
            phone_duration: 0.05,
            phone_formants: 0.02,
        }
    }
}

/// Cycle-to-cycle irregularity of the glottal source and formant damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoiceQuality {
    /// Relative standard deviation of each glottal period.
    pub cycle_jitter: f64,
    /// Relative standard deviation of each pulse's amplitude.
    pub shimmer: f64,
    pub bandwidth_scale: f64,
}

impl Default for VoiceQuality {
    fn default() -> Self {
        Self {
            cycle_jitter: 0.01,
            shimmer: 0.05,
            bandwidth_scale: 1.0,
        }
    }
}

/// Half-widths of the uniform ranges voices are drawn from. Relative unless
/// the name says otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoiceSpread {
    pub tract_length: f64,
    pub formant: f64,
    pub contour: f64,
    pub rhythm: f64,
    pub tempo: f64,
    pub energy_db: f64,
}

impl Default for VoiceSpread {
    fn default() -> Self {
        Self {
            tract_length: 0.1,
            formant: 0.06,
            contour: 0.2,
            rhythm: 0.15,
            tempo: 0.15,
            energy_db: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub num_speakers: usize,
    pub num_sentences: usize,
    pub seed: u64,
    pub sample_rate: u32,
    pub phones_per_sentence: usize,
    pub takes: ProtocolCounts,
    pub shout: ShoutTransform,
    pub jitter: TakeJitter,
    pub spread: VoiceSpread,
    pub voice_quality: VoiceQuality,
    /// RMS level of a neutral take before the speaker gain, in full-scale units.
    pub nominal_rms: f64,
    /// Standard deviation of the background noise, in full-scale units.
    pub noise_floor: f64,
    /// Standard deviation of low-frequency room noise, in full-scale units.
    pub rumble: f64,
    /// Corner frequency of the room noise in Hz.
    pub rumble_corner: f64,
    /// Silence before and after the phones, in seconds.
    pub padding: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_speakers: 10,
            num_sentences: 3,
            seed: 20100101,
            sample_rate: PROTOCOL_SAMPLE_RATE,
            phones_per_sentence: 7,
            takes: ProtocolCounts::default(),
            shout: ShoutTransform::default(),
            jitter: TakeJitter::default(),
            spread: VoiceSpread::default(),
            voice_quality: VoiceQuality::default(),
            nominal_rms: 0.04,
            noise_floor: 2e-4,
            rumble: 0.004,
            rumble_corner: 150.0,
            padding: 0.05,
        }
    }
}

// Vowel targets relative to a neutral (500, 1500, 2500) Hz tract.
const VOWELS: [[f64; 3]; 10] = [
    [270.0, 2290.0, 3010.0],
    [390.0, 1990.0, 2550.0],
    [530.0, 1840.0, 2480.0],
    [660.0, 1720.0, 2410.0],
    [520.0, 1190.0, 2390.0],
    [730.0, 1090.0, 2440.0],
    [570.0, 840.0, 2410.0],
    [440.0, 1020.0, 2240.0],
    [300.0, 870.0, 2240.0],
    [490.0, 1350.0, 1690.0],
];
const NEUTRAL_TRACT: [f64; 3] = [500.0, 1500.0, 2500.0];
const FRICATIVES: [f64; 3] = [2500.0, 4000.0, 5500.0];
const BANDWIDTHS: [f64; 4] = [70.0, 100.0, 140.0, 200.0];

/// Mixes a seed with a path of indices (splitmix64 finalizer per step).
pub fn sub_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut z = seed;
    for &p in parts {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

pub fn speaker_id(index: usize, count: usize) -> String {
    let width = count.to_string().len().max(2);
    format!("spk{:0width$}", index + 1)
}

pub fn sentence_id(index: usize, count: usize) -> String {
    let width = count.to_string().len();
    format!("s{:0width$}", index + 1)
}

pub fn speaker_gender(index: usize) -> Gender {
    if index.is_multiple_of(2) {
        Gender::Male
    } else {
        Gender::Female
    }
}

/// Voice for one speaker index; depends only on `(seed, index)`.
pub fn voice_for(index: usize, seed: u64, spread_cfg: &VoiceSpread, shout: ShoutTransform) -> SyntheticVoiceSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &[1, index as u64]));
    let gender = speaker_gender(index);
    let (f0_range, tract) = match gender {
        Gender::Male => ((95.0, 145.0), 1.0),
        Gender::Female => ((175.0, 245.0), 1.17),
    };
    let base_f0 = rng.random_range(f0_range.0..f0_range.1);
    let mut spread = |width: f64| 1.0 + rng.random_range(-width..=width);
    let length = spread(spread_cfg.tract_length);
    let formant_profile = [500.0, 1500.0, 2500.0, 3500.0]
        .iter()
        .map(|f| f * tract * length * spread(spread_cfg.formant))
        .collect();
    let mut contour = [1.0; 4];
    for c in contour.iter_mut().skip(1) {
        *c = spread(spread_cfg.contour);
    }
    let mut rhythm = [1.0; 3];
    for r in &mut rhythm {
        *r = spread(spread_cfg.rhythm);
    }
    let tempo = spread(spread_cfg.tempo);
    SyntheticVoiceSpec {
        gender,
        base_f0,
        formant_profile,
        energy: 10f64.powf(rng.random_range(-spread_cfg.energy_db..=spread_cfg.energy_db) / 20.0),
        tempo,
        contour,
        rhythm,
        tilt: rng.random_range(0.55..0.8),
        breathiness: rng.random_range(0.02..0.08),
        shout_transform: shout,
    }
}

/// Phone script for one sentence index; shared by all voices.
pub fn sentence_script(index: usize, seed: u64, num_phones: usize) -> SentenceScript {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &[2, index as u64]));
    let mut phones = Vec::with_capacity(num_phones);
    let mut last_vowel = usize::MAX;
    for i in 0..num_phones {
        // never open or close on a fricative, never two in a row
        let fricative = i > 0 && i + 1 < num_phones && phones.last().is_some_and(|p: &Phone| p.voiced) && rng.random_bool(0.2);
        if fricative {
            phones.push(Phone {
                formant_scale: [1.0; 3],
                voiced: false,
                frication: FRICATIVES[rng.random_range(0..FRICATIVES.len())],
                duration: rng.random_range(0.06..0.10),
            });
        } else {
            let mut v = rng.random_range(0..VOWELS.len());
            if v == last_vowel {
                v = (v + 1 + rng.random_range(0..VOWELS.len() - 1)) % VOWELS.len();
            }
            last_vowel = v;
            let mut scale = [0.0; 3];
            for k in 0..3 {
                scale[k] = VOWELS[v][k] / NEUTRAL_TRACT[k];
            }
            phones.push(Phone {
                formant_scale: scale,
                voiced: true,
                frication: 0.0,
                duration: rng.random_range(0.08..0.15),
            });
        }
    }
    SentenceScript { phones }
}

/// Second-order resonator with unit gain at DC.
#[derive(Default)]
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bw: f64, sr: f64) -> f64 {
        let r = (-PI * bw / sr).exp();
        let c = -r * r;
        let b = 2.0 * r * (2.0 * PI * freq / sr).cos();
        let a = 1.0 - b - c;
        let y = a * x + b * self.y1 + c * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Rosenberg glottal flow over one period, `phase` in [0, 1).
fn rosenberg(phase: f64) -> f64 {
    const OPEN: f64 = 0.4;
    const CLOSE: f64 = 0.16;
    if phase < OPEN {
        0.5 * (1.0 - (PI * phase / OPEN).cos())
    } else if phase < OPEN + CLOSE {
        (0.5 * PI * (phase - OPEN) / CLOSE).cos()
    } else {
        0.0
    }
}

/// Piecewise-linear F0 multiplier through the contour knots.
fn contour_at(contour: &[f64; 4], x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0) * 3.0;
    let k = (x.floor() as usize).min(2);
    let t = x - k as f64;
    contour[k] * (1.0 - t) + contour[k + 1] * t
}

/// Renders one take. `take_seed` drives jitter and noise only.
pub fn render(
    voice: &SyntheticVoiceSpec,
    script: &SentenceScript,
    shouted: bool,
    take_seed: u64,
    config: &SynthConfig,
) -> Result<AudioBuffer> {
    let sr = config.sample_rate as f64;
    let jit = &config.jitter;
    let mut rng = ChaCha8Rng::seed_from_u64(take_seed);
    let gauss = |sd: f64, rng: &mut ChaCha8Rng| -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        z * sd
    };
    let shout = &voice.shout_transform;

    let mut f0 = voice.base_f0 * (1.0 + gauss(jit.f0, &mut rng));
    let formant_jitter = 1.0 + gauss(jit.formants, &mut rng);
    let mut tempo = voice.tempo * (1.0 + gauss(jit.tempo, &mut rng));
    let mut gain = voice.energy * 10f64.powf(gauss(jit.energy_db, &mut rng) / 20.0);
    let mut tilt = voice.tilt;
    let mut contour = voice.contour;
    for c in contour.iter_mut().skip(1) {
        *c += gauss(jit.contour, &mut rng);
    }
    if shouted {
        f0 *= shout.f0_scale;
        tempo *= shout.duration_scale;
        gain *= 10f64.powf(shout.energy_gain_db / 20.0);
        tilt = (tilt - shout.spectral_tilt_shift).clamp(0.0, 0.99);
    }

    // phone durations in samples, with the rhythm of the third each phone starts in
    let nominal: f64 = script.phones.iter().map(|p| p.duration).sum();
    let mut elapsed = 0.0;
    let mut lengths = Vec::with_capacity(script.phones.len());
    for p in &script.phones {
        let third = ((elapsed / nominal) * 3.0).floor().min(2.0) as usize;
        elapsed += p.duration;
        let d = p.duration * tempo * voice.rhythm[third] * (1.0 + gauss(jit.phone_duration, &mut rng));
        lengths.push(((d * sr).round() as usize).max(1));
    }
    let speech_len: usize = lengths.iter().sum();
    let pad = (config.padding * sr).round() as usize;

    let transition = (0.025 * sr) as usize;
    let mut speech = Vec::with_capacity(speech_len);
    let mut resonators: Vec<Resonator> = (0..4).map(|_| Resonator::default()).collect();
    let mut fric_res = Resonator::default();
    let mut phase = 0.0;
    let mut cycle_rate = 1.0;
    let mut cycle_amp = 1.0;
    let bw_scale = config.voice_quality.bandwidth_scale;
    let mut prev_flow = 0.0;
    let mut tilt_state = 0.0;
    let mut prev_formants: Option<[f64; 3]> = None;
    let mut n_total = 0usize;
    for (p, &len) in script.phones.iter().zip(&lengths) {
        let target: [f64; 3] = std::array::from_fn(|k| {
            voice.formant_profile[k] * p.formant_scale[k] * formant_jitter * (1.0 + gauss(jit.phone_formants, &mut rng))
        });
        let start = prev_formants.unwrap_or(target);
        for n in 0..len {
            let x = n_total as f64 / speech_len as f64;
            n_total += 1;
            let sample = if p.voiced {
                let t = (n as f64 / transition as f64).min(1.0);
                let formants: [f64; 3] = std::array::from_fn(|k| start[k] + (target[k] - start[k]) * t);
                let pitch = f0 * contour_at(&contour, x);
                phase += pitch * cycle_rate / sr;
                if phase >= 1.0 {
                    phase -= 1.0;
                    cycle_rate = 1.0 + gauss(config.voice_quality.cycle_jitter, &mut rng);
                    cycle_amp = 1.0 + gauss(config.voice_quality.shimmer, &mut rng);
                }
                let flow = cycle_amp * rosenberg(phase);
                let excitation = flow - prev_flow + voice.breathiness * 0.05 * gauss(1.0, &mut rng);
                prev_flow = flow;
                tilt_state = (1.0 - tilt) * excitation + tilt * tilt_state;
                let mut y = tilt_state;
                for (k, res) in resonators.iter_mut().enumerate() {
                    let f = if k < 3 { formants[k] } else { voice.formant_profile[3] * formant_jitter };
                    y = res.step(y, f, BANDWIDTHS[k] * bw_scale, sr);
                }
                y
            } else {
                let noise = gauss(1.0, &mut rng);
                0.1 * fric_res.step(noise, p.frication, 600.0, sr)
            };
            speech.push(sample);
        }
        if p.voiced {
            prev_formants = Some(target);
        }
    }

    let rms = (speech.iter().map(|x| x * x).sum::<f64>() / speech.len().max(1) as f64).sqrt();
    let scale = if rms > 0.0 { config.nominal_rms * gain / rms } else { 0.0 };
    let noise = Normal::new(0.0, config.noise_floor.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    // one-pole lowpassed white noise, scaled to unit variance
    let pole = (-2.0 * PI * config.rumble_corner / sr).exp();
    let rumble_gain = config.rumble * ((1.0 + pole) / (1.0 - pole)).sqrt() * (1.0 - pole);
    let mut rumble = 0.0;
    let total = speech_len + 2 * pad;
    let mut samples = Vec::with_capacity(total);
    for i in 0..total {
        let s = if i >= pad && i < pad + speech_len { speech[i - pad] * scale } else { 0.0 };
        let z: f64 = StandardNormal.sample(&mut rng);
        rumble = pole * rumble + z;
        let v = (s + noise.sample(&mut rng) + rumble_gain * rumble) * 32768.0;
        samples.push(v.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16);
    }
    AudioBuffer::new(samples, config.sample_rate)
}

/// Manifest rows in protocol order, without touching the filesystem.
pub fn plan_manifest(config: &SynthConfig) -> CorpusManifest {
    let mut entries = Vec::new();
    let layout = [
        (Environment::Neutral, Session::Train, config.takes.neutral_train),
        (Environment::Neutral, Session::Test, config.takes.neutral_test),
        (Environment::Shouted, Session::Test, config.takes.shouted_test),
    ];
    for s in 0..config.num_speakers {
        let speaker = speaker_id(s, config.num_speakers);
        for t in 0..config.num_sentences {
            let sentence = sentence_id(t, config.num_sentences);
            for (environment, session, count) in layout {
                for take in 1..=count {
                    entries.push(ManifestEntry {
                        path: format!("{speaker}/{sentence}/{environment}_{session}_{take:02}.wav"),
                        speaker: speaker.clone(),
                        gender: speaker_gender(s),
                        sentence: sentence.clone(),
                        environment,
                        session,
                        take,
                    });
                }
            }
        }
    }
    CorpusManifest { entries }
}

fn take_seed(seed: u64, speaker: usize, sentence: usize, e: &ManifestEntry) -> u64 {
    let env = match (e.environment, e.session) {
        (Environment::Neutral, Session::Train) => 0,
        (Environment::Neutral, Session::Test) => 1,
        (Environment::Shouted, _) => 2,
    };
    sub_seed(seed, &[3, speaker as u64, sentence as u64, env, e.take as u64])
}

/// Writes the corpus under `root` along with `manifest.csv`, and returns the
/// manifest. Output is a pure function of `config`.
pub fn synth_corpus(root: impl AsRef<Path>, config: &SynthConfig) -> Result<CorpusManifest> {
    if config.num_speakers < 2 {
        return Err(Error::Config(format!(
            "at least 2 speakers are needed, got {}",
            config.num_speakers
        )));
    }
    if config.num_sentences == 0 || config.phones_per_sentence == 0 {
        return Err(Error::Config("need at least one sentence and one phone".into()));
    }
    config.shout.validate()?;
    let root = root.as_ref();
    let manifest = plan_manifest(config);
    let voices: Vec<_> = (0..config.num_speakers).map(|s| voice_for(s, config.seed, &config.spread, config.shout)).collect();
    let scripts: Vec<_> = (0..config.num_sentences)
        .map(|t| sentence_script(t, config.seed, config.phones_per_sentence))
        .collect();
    let per_pair = (config.takes.neutral_train + config.takes.neutral_test + config.takes.shouted_test) as usize;
    for s in 0..config.num_speakers {
        for t in 0..config.num_sentences {
            let first = &manifest.entries[(s * config.num_sentences + t) * per_pair];
            if let Some(dir) = root.join(&first.path).parent() {
                std::fs::create_dir_all(dir)?;
            }
        }
    }
    manifest
        .entries
        .par_iter()
        .enumerate()
        .try_for_each(|(i, e)| {
            let pair = i / per_pair.max(1);
            let (s, t) = (pair / config.num_sentences, pair % config.num_sentences);
            let shouted = e.environment == Environment::Shouted;
            let audio = render(&voices[s], &scripts[t], shouted, take_seed(config.seed, s, t, e), config)?;
            audio.write_wav(root.join(&e.path))
        })?;
    manifest.write_csv(root.join(MANIFEST_FILE))?;
    Ok(manifest)
}

pub const MANIFEST_FILE: &str = "manifest.csv";
