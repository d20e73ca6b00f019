use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sphmm_core::config::Config;
use sphmm_core::corpus::{ingest_corpus, synth_corpus};
use sphmm_core::eval::report::{render_text, write_outputs};
use sphmm_core::experiment::{enroll_corpus, prepare_corpus, run_prepared};
use sphmm_core::features::{AudioBuffer, Frontend, PROTOCOL_SAMPLE_RATE};
use sphmm_core::speaker::{score_speakers, Registry, Variant};

/// Speaker identification with suprasegmental hidden Markov models.
#[derive(Parser)]
#[command(name = "sphmm", version)]
struct Cli {
    /// TOML configuration file. Defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set identify.alpha=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// More log output (repeat for more).
    #[arg(long, short, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus and its manifest.
    SynthCorpus {
        #[arg(long)]
        speakers: Option<usize>,
        #[arg(long)]
        sentences: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (corpus.root).
        #[arg(long)]
        root: Option<PathBuf>,
    },
    /// Validate a manifest and the WAV files it lists.
    Ingest {
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Train reference models on the neutral training takes and save them.
    Enroll {
        /// Directory for the model documents (experiment.models_dir).
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Identify the speaker of one WAV file.
    Identify {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        sentence: String,
        #[arg(long, default_value = "CSPHMM2")]
        variant: Variant,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Identify every test take and write accuracy tables and t-tests.
    Evaluate(RunArgs),
    /// Accuracy against the fusion weight.
    SweepAlpha(RunArgs),
    /// Cross-validated accuracy and its spread.
    Crossval(RunArgs),
    /// Full report, with the sweep and cross-validation as configured.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Use models saved by `enroll` instead of training.
    #[arg(long)]
    models: Option<PathBuf>,
    /// Output directory (experiment.output_dir).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn quoted(p: &Path) -> String {
    format!("{:?}", p.display().to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut overrides = cli.overrides.clone();
    match &cli.command {
        Command::SynthCorpus {
            speakers,
            sentences,
            seed,
            root,
        } => {
            if let Some(n) = speakers {
                overrides.push(format!("synth.num_speakers={n}"));
            }
            if let Some(n) = sentences {
                overrides.push(format!("synth.num_sentences={n}"));
            }
            if let Some(s) = seed {
                overrides.push(format!("synth.seed={s}"));
            }
            if let Some(r) = root {
                overrides.push(format!("corpus.root={}", quoted(r)));
            }
        }
        Command::Ingest { root, manifest } => {
            if let Some(r) = root {
                overrides.push(format!("corpus.root={}", quoted(r)));
            }
            if let Some(m) = manifest {
                overrides.push(format!("corpus.manifest={}", quoted(m)));
            }
        }
        Command::Enroll { models } | Command::Identify { models, .. } => {
            if let Some(m) = models {
                overrides.push(format!("experiment.models_dir={}", quoted(m)));
            }
        }
        Command::Evaluate(a) | Command::SweepAlpha(a) | Command::Crossval(a) | Command::Report(a) => {
            if let Some(o) = &a.output {
                overrides.push(format!("experiment.output_dir={}", quoted(o)));
            }
        }
    }
    match &cli.command {
        Command::Evaluate(_) => overrides.extend(["experiment.sweep=false".into(), "experiment.crossval=false".into()]),
        Command::SweepAlpha(_) => overrides.extend(["experiment.sweep=true".into(), "experiment.crossval=false".into()]),
        Command::Crossval(_) => overrides.extend(["experiment.sweep=false".into(), "experiment.crossval=true".into()]),
        _ => {}
    }
    let config = Config::load(cli.config.as_deref(), &overrides).context("loading configuration")?;

    match cli.command {
        Command::SynthCorpus { .. } => {
            let manifest = synth_corpus(&config.corpus.root, &config.synth).context("generating corpus")?;
            println!("wrote {} utterances under {}", manifest.len(), config.corpus.root.display());
        }
        Command::Ingest { .. } => {
            let ingested = ingest_corpus(&config.corpus.root, config.corpus.manifest_path())?;
            for w in &ingested.warnings {
                eprintln!("warning: {w}");
            }
            if config.corpus.protocol {
                ingested.manifest.check_protocol(&config.synth.takes)?;
            }
            let m = &ingested.manifest;
            println!(
                "{} entries, {} speakers, {} sentences",
                m.len(),
                m.speakers().len(),
                m.sentences().len()
            );
        }
        Command::Enroll { .. } => {
            let corpus = prepare_corpus(&config)?;
            let (registry, warnings) = enroll_corpus(&corpus, &config)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            registry.save(&config.experiment.models_dir)?;
            println!(
                "saved {} models to {}",
                registry.len(),
                config.experiment.models_dir.display()
            );
        }
        Command::Identify {
            wav,
            sentence,
            variant,
            alpha,
            ..
        } => {
            let alpha = alpha.unwrap_or(config.identify.alpha);
            let registry = Registry::load(&config.experiment.models_dir)
                .with_context(|| format!("loading models from {}", config.experiment.models_dir.display()))?;
            let audio = AudioBuffer::read_wav(&wav)?;
            let utterance = Frontend::new(config.frontend.clone(), PROTOCOL_SAMPLE_RATE).utterance(&audio)?;
            let result = score_speakers(&utterance, &sentence, variant, &registry, config.identify.scoring)?;
            if !(0.0..=1.0).contains(&alpha) {
                bail!("alpha must lie in [0, 1], got {alpha}");
            }
            let ranked = result.fuse(alpha)?;
            println!("rank,speaker,acoustic,prosodic,fused");
            for (i, r) in ranked.ranked.iter().enumerate() {
                println!(
                    "{},{},{:.6},{:.6},{:.6}",
                    i + 1,
                    r.speaker_id,
                    r.score.acoustic_logp,
                    r.score.prosodic_logp,
                    r.score.fused
                );
            }
            if ranked.tie {
                eprintln!("warning: tie between the top two speakers; lowest id chosen");
            }
        }
        Command::Evaluate(args) | Command::SweepAlpha(args) | Command::Crossval(args) | Command::Report(args) => {
            let corpus = prepare_corpus(&config)?;
            let registry = match &args.models {
                Some(dir) => Some(Registry::load(dir).with_context(|| format!("loading models from {}", dir.display()))?),
                None => None,
            };
            let results = run_prepared(&corpus, &config, registry.as_ref())?;
            let written = write_outputs(&config.experiment.output_dir, &results)?;
            print!("{}", render_text(&results));
            log::info!("wrote {} files to {}", written.len(), config.experiment.output_dir.display());
        }
    }
    Ok(())
}
