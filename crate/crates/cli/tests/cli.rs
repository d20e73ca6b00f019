use std::path::Path;
use std::process::{Command, Output};

fn sphmm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphmm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("running sphmm")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const QUICK: &[&str] = &["--set", "experiment.variants=[\"CSPHMM2\"]"];

fn with_quick<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(QUICK.iter().copied()).collect()
}

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(&sphmm(d, &["synth-corpus", "--speakers", "2", "--sentences", "1", "--seed", "3", "--root", "corpus"]));
    assert!(out.contains("wrote 36 utterances"), "{out}");
    let manifest = std::fs::read_to_string(d.join("corpus/manifest.csv")).unwrap();
    assert!(manifest.starts_with("path,speaker,gender,sentence,environment,session,take\n"));

    let out = ok(&sphmm(d, &["ingest", "--root", "corpus"]));
    assert!(out.contains("36 entries, 2 speakers, 1 sentences"), "{out}");

    ok(&sphmm(d, &with_quick(&["enroll", "--models", "models"])));
    assert!(d.join("models/index.csv").is_file());

    let out = ok(&sphmm(
        d,
        &["identify", "--models", "models", "--wav", "corpus/spk01/s1/neutral_test_01.wav", "--sentence", "s1", "--alpha", "0"],
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "rank,speaker,acoustic,prosodic,fused");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,spk01,"), "{out}");

    let out = ok(&sphmm(d, &with_quick(&["evaluate", "--models", "models", "--output", "eval"])));
    assert!(out.contains("Table 1."), "{out}");
    for f in ["report.txt", "accuracy_fused.csv", "accuracy_acoustic.csv", "ttests.csv", "trials.csv"] {
        assert!(d.join("eval").join(f).is_file(), "{f} missing");
    }
    assert_eq!(std::fs::read_to_string(d.join("eval/report.txt")).unwrap(), out);

    let out = ok(&sphmm(d, &with_quick(&["sweep-alpha", "--models", "models", "--output", "sweep"])));
    assert!(out.contains("Accuracy (%) against alpha"));
    let sweep = std::fs::read_to_string(d.join("sweep/sweep_CSPHMM2_neutral.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("alpha,accuracy"));
    assert_eq!(sweep.lines().count(), 12);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = sphmm(d, &["ingest", "--root", "missing"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = sphmm(d, &["evaluate", "--set", "identify.alpha=2"]);
    assert!(!out.status.success());

    let out = sphmm(d, &["synth-corpus", "--speakers", "1", "--root", "c"]);
    assert!(!out.status.success());

    let out = sphmm(d, &["identify", "--wav", "none.wav", "--sentence", "s1"]);
    assert!(!out.status.success());
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), "[synth]\nnum_speakers = 3\nnum_sentences = 1\n\n[corpus]\nroot = \"c3\"\n").unwrap();
    let out = ok(&sphmm(d, &["--config", "run.toml", "synth-corpus"]));
    assert!(out.contains("wrote 54 utterances"), "{out}");
    assert!(d.join("c3/manifest.csv").is_file());
}
