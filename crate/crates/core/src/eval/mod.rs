//! Accuracy tables, significance tests, alpha sweeps and cross-validation.

mod accuracy;
mod crossval;
pub mod report;
mod trials;
mod ttest;

pub use accuracy::{accuracy_table, pooled_accuracy, AccuracyTable, Tally, TrialRecord};
pub use crossval::{cross_validate, fold_samples, partition, summarize, CrossValRun, CrossValSummary, Partition};
pub use trials::{alpha_sweep, alpha_sweep_uncached, decide_all, default_alphas, score_trials, ScoredTrial, SweepPoint};
pub use ttest::{is_significant, mean, sample_sd, t_from_summary, t_statistic, TTestResult, T_CRITICAL};
