use std::fs;

use sphmm_core::corpus::{
    ingest_corpus, synth_corpus, Environment, ManifestEntry, Session, SynthConfig, MANIFEST_FILE,
};
use sphmm_core::features::AudioBuffer;
use sphmm_core::features::{Frontend, FrontendConfig, PROTOCOL_SAMPLE_RATE};
use sphmm_core::Error;

fn small() -> SynthConfig {
    SynthConfig {
        num_speakers: 2,
        num_sentences: 1,
        seed: 11,
        ..SynthConfig::default()
    }
}

#[test]
fn generation_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = synth_corpus(a.path(), &small()).unwrap();
    let mb = synth_corpus(b.path(), &small()).unwrap();
    assert_eq!(ma, mb);
    for e in &ma.entries {
        assert_eq!(fs::read(a.path().join(&e.path)).unwrap(), fs::read(b.path().join(&e.path)).unwrap(), "{}", e.path);
    }
    assert_eq!(
        fs::read(a.path().join(MANIFEST_FILE)).unwrap(),
        fs::read(b.path().join(MANIFEST_FILE)).unwrap()
    );
}

#[test]
fn manifest_has_the_expected_header() {
    let dir = tempfile::tempdir().unwrap();
    synth_corpus(dir.path(), &small()).unwrap();
    let text = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(text.lines().next().unwrap(), "path,speaker,gender,sentence,environment,session,take");
}

#[test]
fn shouted_takes_are_higher_and_louder() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), &small()).unwrap();
    let frontend = Frontend::new(FrontendConfig::default(), PROTOCOL_SAMPLE_RATE);
    let stats = |env: Environment| {
        let (mut f0, mut rms, mut n) = (0.0, 0.0, 0.0);
        for e in manifest.entries.iter().filter(|e| e.environment == env && e.speaker == "spk01") {
            let audio = AudioBuffer::read_wav(dir.path().join(&e.path)).unwrap();
            let u = frontend.utterance(&audio).unwrap();
            let voiced: Vec<f64> = u.prosody.f0.iter().copied().filter(|&f| f > 0.0).collect();
            f0 += voiced.iter().sum::<f64>() / voiced.len() as f64;
            rms += audio.rms();
            n += 1.0;
        }
        (f0 / n, rms / n)
    };
    let (f0_n, rms_n) = stats(Environment::Neutral);
    let (f0_s, rms_s) = stats(Environment::Shouted);
    assert!(f0_s > 1.3 * f0_n, "F0 {f0_n} -> {f0_s}");
    assert!(rms_s > 2.0 * rms_n, "RMS {rms_n} -> {rms_s}");
}

#[test]
fn generated_corpus_ingests_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let written = synth_corpus(dir.path(), &small()).unwrap();
    let ingested = ingest_corpus(dir.path(), dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(ingested.warnings.is_empty());
    assert_eq!(ingested.manifest, written);
    ingested.manifest.check_protocol(&small().takes).unwrap();
}

#[test]
fn empty_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(MANIFEST_FILE);
    fs::write(&path, "path,speaker,gender,sentence,environment,session,take\n").unwrap();
    assert!(matches!(ingest_corpus(dir.path(), &path), Err(Error::EmptyManifest)));
}

#[test]
fn one_bad_path_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = synth_corpus(dir.path(), &small()).unwrap();
    manifest.entries.truncate(10);
    manifest.entries[4].path = "nowhere/missing.wav".into();
    let path = dir.path().join("partial.csv");
    manifest.write_csv(&path).unwrap();
    match ingest_corpus(dir.path(), &path) {
        Err(Error::Manifest(problems)) => {
            assert_eq!(problems.len(), 1);
            assert!(problems[0].contains("nowhere/missing.wav"));
        }
        other => panic!("expected a manifest error, got {other:?}"),
    }
}

#[test]
fn duplicates_and_bad_headers_are_all_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = synth_corpus(dir.path(), &small()).unwrap();
    fs::write(dir.path().join("junk.wav"), b"not a wav file").unwrap();
    let dup = manifest.entries[0].clone();
    manifest.entries.push(dup);
    manifest.entries.push(ManifestEntry {
        path: "junk.wav".into(),
        take: 99,
        session: Session::Test,
        ..manifest.entries[0].clone()
    });
    let path = dir.path().join("bad.csv");
    manifest.write_csv(&path).unwrap();
    match ingest_corpus(dir.path(), &path) {
        Err(Error::Manifest(problems)) => {
            assert_eq!(problems.len(), 2, "{problems:?}");
            assert!(problems.iter().any(|p| p.contains("junk.wav")));
            assert!(problems.iter().any(|p| p.contains("duplicate")));
        }
        other => panic!("expected a manifest error, got {other:?}"),
    }
}

#[test]
fn protocol_check_flags_missing_takes() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = synth_corpus(dir.path(), &small()).unwrap();
    manifest.entries.retain(|e| !(e.speaker == "spk02" && e.environment == Environment::Shouted && e.take == 3));
    assert!(matches!(manifest.check_protocol(&small().takes), Err(Error::Manifest(_))));
}

#[test]
fn too_few_speakers_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        num_speakers: 1,
        ..small()
    };
    assert!(synth_corpus(dir.path(), &cfg).is_err());
}
