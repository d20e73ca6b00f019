use sphmm_core::config::Config;
use sphmm_core::speaker::Variant;

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "[identify]\nalpha = 0.2\n\n[synth]\nnum_speakers = 4\n\n[experiment]\nvariants = [\"CSPHMM1\"]\n",
    )
    .unwrap();
    let c = Config::load(Some(&path), &strings(&["identify.alpha=0.7", "corpus.root=elsewhere"])).unwrap();
    assert_eq!(c.identify.alpha, 0.7);
    assert_eq!(c.synth.num_speakers, 4);
    assert_eq!(c.experiment.variants, vec![Variant::Csphmm1]);
    assert_eq!(c.corpus.root, std::path::PathBuf::from("elsewhere"));
}

#[test]
fn missing_file_is_an_error() {
    assert!(Config::load(Some(std::path::Path::new("/nonexistent/run.toml")), &[]).is_err());
}

#[test]
fn malformed_overrides_are_rejected() {
    assert!(Config::parse("", &strings(&["identify.alpha"])).is_err());
    assert!(Config::parse("", &strings(&["=3"])).is_err());
    assert!(Config::parse("", &strings(&["identify.alpha=\"high\""])).is_err());
    assert!(Config::parse("", &strings(&["experiment.variants=[]"])).is_err());
    assert!(Config::parse("", &strings(&["synth.shout.f0_scale=0.5"])).is_err());
}

#[test]
fn serialized_defaults_parse_back() {
    let c = Config::default();
    let text = c.to_toml().unwrap();
    assert_eq!(Config::parse(&text, &[]).unwrap(), c);
}
