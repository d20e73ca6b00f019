//! Plain-text report and CSV emitters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Environment, Gender};
use crate::error::Result;
use crate::eval::{AccuracyTable, CrossValSummary, SweepPoint, TTestResult, TrialRecord};
use crate::speaker::Variant;

pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestRow {
    pub environment: Environment,
    pub first: String,
    pub second: String,
    pub result: TTestResult,
}

/// Everything a report shows. Built by the experiment runner.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub variants: Vec<Variant>,
    pub alpha: f64,
    pub seed: u64,
    pub trial_counts: BTreeMap<Environment, usize>,
    /// Accuracy of the fused scores at `alpha`.
    pub fused: AccuracyTable,
    /// Accuracy of the acoustic scores alone.
    pub acoustic: AccuracyTable,
    /// What the t-test samples are, for the report header.
    pub sample_source: String,
    pub versus_best: Vec<TTestRow>,
    pub versus_acoustic: Vec<TTestRow>,
    pub sweep: BTreeMap<Variant, Vec<SweepPoint>>,
    pub crossval: BTreeMap<Variant, CrossValSummary>,
    /// Per-trial decisions at `alpha` and at 0.
    pub records: Vec<TrialRecord>,
    pub warnings: Vec<String>,
}

const ENVS: [Environment; 2] = [Environment::Neutral, Environment::Shouted];

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"))
}

fn env_title(env: Environment) -> &'static str {
    match env {
        Environment::Neutral => "Neutral",
        Environment::Shouted => "Shouted",
    }
}

fn accuracy_block(out: &mut String, table: &AccuracyTable, variants: &[Variant], name: fn(Variant) -> &'static str) {
    let _ = write!(out, "{:<12}{:<9}", "Environment", "Gender");
    for v in variants {
        let _ = write!(out, "{:>11}", name(*v));
    }
    out.push('\n');
    for env in ENVS {
        for (row, label) in ["Male", "Female", "Average"].into_iter().enumerate() {
            let head = if row == 0 { env_title(env) } else { "" };
            let _ = write!(out, "{head:<12}{label:<9}");
            for v in variants {
                let value = match row {
                    0 => table.percent(*v, env, Gender::Male),
                    1 => table.percent(*v, env, Gender::Female),
                    _ => table.average(*v, env),
                };
                let _ = write!(out, "{:>11}", cell(value));
            }
            out.push('\n');
        }
    }
}

fn t_block(out: &mut String, rows: &[TTestRow]) {
    if rows.is_empty() {
        out.push_str("(not enough variants)\n");
        return;
    }
    let _ = writeln!(out, "{:<12}{:<28}{:>10}{:>12}", "Environment", "Comparison", "t", "SD pooled");
    for r in rows {
        let mark = if r.result.significant { " *" } else { "" };
        let _ = writeln!(
            out,
            "{:<12}{:<28}{:>10.3}{:>12.3}{mark}",
            env_title(r.environment),
            format!("{} vs {}", r.first, r.second),
            r.result.t_value,
            r.result.sd_pooled
        );
    }
}

/// Renders the full report. Contains no timestamps or paths, so identical
/// inputs give identical bytes.
pub fn render_text(res: &ExperimentResults) -> String {
    let mut out = String::new();
    out.push_str("Speaker identification report\n\n");
    let names: Vec<&str> = res.variants.iter().map(|v| v.name()).collect();
    let _ = writeln!(out, "Models: {}", names.join(", "));
    let _ = writeln!(out, "Fusion weight alpha: {:.2}", res.alpha);
    let _ = writeln!(out, "Seed: {}", res.seed);
    for env in ENVS {
        let _ = writeln!(out, "{} test utterances: {}", env_title(env), res.trial_counts.get(&env).unwrap_or(&0));
    }

    let _ = writeln!(out, "\nTable 1. Identification accuracy (%) with fused scores, alpha = {:.2}", res.alpha);
    accuracy_block(&mut out, &res.fused, &res.variants, Variant::name);
    out.push_str("\nTable 2. Identification accuracy (%) with acoustic scores only (alpha = 0)\n");
    accuracy_block(&mut out, &res.acoustic, &res.variants, Variant::acoustic_name);

    let _ = writeln!(
        out,
        "\nTable 3. t values, CSPHMM2 against the other models (samples: {}; * marks t > 1.645)",
        res.sample_source
    );
    t_block(&mut out, &res.versus_best);
    let _ = writeln!(
        out,
        "\nTable 4. t values, each model against its acoustic-only counterpart (samples: {})",
        res.sample_source
    );
    t_block(&mut out, &res.versus_acoustic);

    if !res.sweep.is_empty() {
        out.push_str("\nAccuracy (%) against alpha\n");
        for env in ENVS {
            let _ = write!(out, "{:<12}{:<7}", env_title(env), "alpha");
            for v in res.sweep.keys() {
                let _ = write!(out, "{:>11}", v.name());
            }
            out.push('\n');
            let alphas: Vec<f64> = res.sweep.values().next().map(|p| p.iter().map(|x| x.alpha).collect()).unwrap_or_default();
            for (i, a) in alphas.iter().enumerate() {
                let _ = write!(out, "{:<12}{:<7.1}", "", a);
                for points in res.sweep.values() {
                    let _ = write!(out, "{:>11}", cell(points.get(i).and_then(|p| p.accuracy.get(&env).copied())));
                }
                out.push('\n');
            }
        }
    }

    if !res.crossval.is_empty() {
        out.push_str("\nCross-validation accuracy (%), mean and standard deviation over subsets\n");
        let _ = writeln!(out, "{:<12}{:<12}{:>10}{:>10}", "Model", "Environment", "Mean", "SD");
        for (v, s) in &res.crossval {
            for env in ENVS {
                if let (Some(m), Some(sd)) = (s.mean.get(&env), s.sd.get(&env)) {
                    let _ = writeln!(out, "{:<12}{:<12}{:>10.2}{:>10.2}", v.name(), env_title(env), m, sd);
                }
            }
        }
    }

    if !res.warnings.is_empty() {
        let _ = writeln!(out, "\nWarnings ({})", res.warnings.len());
        for w in &res.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn accuracy_csv(table: &AccuracyTable, variants: &[Variant], name: fn(Variant) -> &'static str) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "environment", "gender", "correct", "total", "accuracy"])?;
    for v in variants {
        for env in ENVS {
            for g in [Gender::Male, Gender::Female] {
                if let Some(t) = table.cells.get(&(*v, env, g)) {
                    w.write_record([
                        name(*v).to_string(),
                        env.to_string(),
                        g.to_string().to_lowercase(),
                        t.correct.to_string(),
                        t.total.to_string(),
                        cell4(t.percent()),
                    ])?;
                }
            }
            if let Some(avg) = table.average(*v, env) {
                w.write_record([name(*v), &env.to_string(), "average", "", "", &format!("{avg:.4}")])?;
            }
        }
    }
    Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
}

fn cell4(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.4}"))
}

fn ttest_csv(groups: &[(&str, &[TTestRow])]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["table", "environment", "first", "second", "n", "t", "sd_pooled", "significant"])?;
    for (table, rows) in groups {
        for r in rows.iter() {
            w.write_record([
                table.to_string(),
                r.environment.to_string(),
                r.first.clone(),
                r.second.clone(),
                r.result.n.to_string(),
                format!("{:.6}", r.result.t_value),
                format!("{:.6}", r.result.sd_pooled),
                r.result.significant.to_string(),
            ])?;
        }
    }
    Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
}

/// Two columns, `alpha,accuracy`, for one variant and environment.
pub fn sweep_csv(points: &[SweepPoint], env: Environment) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha", "accuracy"])?;
    for p in points {
        if let Some(a) = p.accuracy.get(&env) {
            w.write_record([format!("{:.1}", p.alpha), format!("{a:.4}")])?;
        }
    }
    Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
}

fn crossval_csv(summaries: &BTreeMap<Variant, CrossValSummary>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "environment", "subset", "accuracy"])?;
    for (v, s) in summaries {
        for env in ENVS {
            for (k, acc) in s.per_subset.iter().enumerate() {
                if let Some(a) = acc.get(&env) {
                    w.write_record([v.name().to_string(), env.to_string(), (k + 1).to_string(), format!("{a:.4}")])?;
                }
            }
            if let (Some(m), Some(sd)) = (s.mean.get(&env), s.sd.get(&env)) {
                w.write_record([v.name(), &env.to_string(), "mean", &format!("{m:.4}")])?;
                w.write_record([v.name(), &env.to_string(), "sd", &format!("{sd:.4}")])?;
            }
        }
    }
    Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
}

/// Writes the text report and every CSV into `dir`. Returns the written paths.
pub fn write_outputs(dir: impl AsRef<Path>, res: &ExperimentResults) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = vec![
        (dir.join(REPORT_FILE), render_text(res).into_bytes()),
        (dir.join("accuracy_fused.csv"), accuracy_csv(&res.fused, &res.variants, Variant::name)?),
        (dir.join("accuracy_acoustic.csv"), accuracy_csv(&res.acoustic, &res.variants, Variant::acoustic_name)?),
        (
            dir.join("ttests.csv"),
            ttest_csv(&[("versus_csphmm2", &res.versus_best), ("versus_acoustic", &res.versus_acoustic)])?,
        ),
    ];
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &res.records {
        w.serialize(r)?;
    }
    files.push((dir.join("trials.csv"), w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?));
    for (v, points) in &res.sweep {
        for env in ENVS {
            files.push((dir.join(format!("sweep_{}_{env}.csv", v.name())), sweep_csv(points, env)?));
        }
    }
    if !res.crossval.is_empty() {
        files.push((dir.join("crossval.csv"), crossval_csv(&res.crossval)?));
    }
    let mut written = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
