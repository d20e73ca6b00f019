//! Experiment configuration: a TOML document with one table per stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{SynthConfig, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::eval::default_alphas;
use crate::features::FrontendConfig;
use crate::speaker::{EnrollConfig, ScoreOptions, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub root: PathBuf,
    /// Defaults to `manifest.csv` under the root.
    pub manifest: Option<PathBuf>,
    /// Require the 5/4/9 take layout per speaker and sentence.
    pub protocol: bool,
}

impl Default for CorpusSection {
    fn default() -> Self {
        Self {
            root: PathBuf::from("corpus"),
            manifest: None,
            protocol: true,
        }
    }
}

impl CorpusSection {
    pub fn manifest_path(&self) -> PathBuf {
        self.manifest.clone().unwrap_or_else(|| self.root.join(MANIFEST_FILE))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentifySection {
    pub alpha: f64,
    #[serde(flatten)]
    pub scoring: ScoreOptions,
}

impl Default for IdentifySection {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            scoring: ScoreOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub variants: Vec<Variant>,
    pub sweep: bool,
    pub alphas: Vec<f64>,
    pub crossval: bool,
    pub num_subsets: usize,
    /// Folds of the test trials used as t-test samples when cross-validation is off.
    pub ttest_folds: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub models_dir: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.to_vec(),
            sweep: true,
            alphas: default_alphas(),
            crossval: false,
            num_subsets: 5,
            ttest_folds: 5,
            seed: 20100101,
            output_dir: PathBuf::from("results"),
            models_dir: PathBuf::from("models"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub corpus: CorpusSection,
    pub synth: SynthConfig,
    pub frontend: FrontendConfig,
    pub model: EnrollConfig,
    pub identify: IdentifySection,
    pub experiment: ExperimentSection,
}

/// Sets `dotted.key` in a TOML table. The value is parsed as a TOML value,
/// falling back to a plain string.
fn set_dotted(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::Config(format!("empty key in {key:?}")))?;
    let mut cur = table;
    for p in parts {
        let next = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = next
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key}: {p} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl Config {
    /// Parses a document and applies `key=value` overrides on top.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            set_dotted(&mut table, k.trim(), v.trim())?;
        }
        let config: Config = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path` if given, otherwise starts from defaults.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::parse(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.identify.alpha;
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidAlpha(a));
        }
        if let Some(bad) = self.experiment.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidAlpha(*bad));
        }
        if self.experiment.variants.is_empty() {
            return Err(Error::Config("experiment.variants is empty".into()));
        }
        self.synth.shout.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.to_toml().unwrap(), &[]).unwrap(), c);
    }

    #[test]
    fn overrides() {
        let c = Config::parse(
            "[identify]\nalpha = 0.2\n",
            &["identify.alpha=0.7".into(), "corpus.root=/tmp/x".into(), "experiment.variants=[\"CSPHMM2\"]".into()],
        )
        .unwrap();
        assert_eq!(c.identify.alpha, 0.7);
        assert_eq!(c.corpus.root, PathBuf::from("/tmp/x"));
        assert_eq!(c.experiment.variants, vec![Variant::Csphmm2]);
    }

    #[test]
    fn rejects_unknown_and_bad_alpha() {
        assert!(Config::parse("[identify]\nbeta = 1\n", &[]).is_err());
        assert!(Config::parse("", &["identify.alpha=1.5".into()]).is_err());
    }
}
