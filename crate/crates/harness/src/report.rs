//! `summarize` and `compare`: statistics recomputed from artifacts on disk.

use std::fmt::Write as _;
use std::path::Path;

use crate::artifacts::read_runs_csv;
use crate::error::{HarnessError, Result};
use crate::experiment::{load_summary, CellStatus, ExperimentSummary};
use crate::stats::{mean_and_ci, mean_log_error, ERROR_FLOOR};

/// Statistics of one cell rebuilt from its `runs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recomputed {
    pub id: String,
    pub runs: usize,
    pub rows_per_run: Vec<usize>,
    pub mean_log_error: Vec<f64>,
    pub ci: Vec<f64>,
    /// Largest absolute difference to `summary.json` over mean and CI.
    pub max_deviation: f64,
}

/// Recomputes every successful cell of the experiment in `dir`.
pub fn recompute(dir: &Path) -> Result<(ExperimentSummary, Vec<Recomputed>)> {
    let summary = load_summary(dir)?;
    let f_min = summary.metadata.f_min;
    let mut out = Vec::new();
    for cell in summary.cells.iter().filter(|c| c.status == CellStatus::Ok) {
        let path = dir.join(&cell.id).join("runs.csv");
        let runs = read_runs_csv(&path)?;
        let errors: Vec<Vec<f64>> = runs
            .iter()
            .map(|r| r.best_by_iteration.iter().map(|b| (b - f_min).max(0.0)).collect())
            .collect();
        if errors.iter().any(|e| e.len() != cell.mean_log_error.len()) {
            return Err(HarnessError::artifact(&path, "run length differs from summary"));
        }
        let (mean, ci) = mean_log_error(&errors);
        let max_deviation = mean
            .iter()
            .zip(&cell.mean_log_error)
            .chain(ci.iter().zip(&cell.ci))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        out.push(Recomputed {
            id: cell.id.clone(),
            runs: runs.len(),
            rows_per_run: runs.iter().map(|r| r.rows).collect(),
            mean_log_error: mean,
            ci,
            max_deviation,
        });
    }
    Ok((summary, out))
}

pub fn summarize_table(dir: &Path) -> Result<String> {
    let (summary, cells) = recompute(dir)?;
    let m = &summary.metadata;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} | portfolio {} | R = {} | T = {} | log10 error, CI = std/sqrt(R)",
        m.benchmark, m.portfolio_size, m.runs, m.iterations
    );
    let _ = writeln!(s, "{:<28} {:>12} {:>10} {:>14}", "cell", "final mean", "ci", "json deviation");
    for c in &cells {
        let _ = writeln!(
            s,
            "{:<28} {:>12.4} {:>10.4} {:>14.2e}",
            c.id,
            c.mean_log_error.last().copied().unwrap_or(f64::NAN),
            c.ci.last().copied().unwrap_or(f64::NAN),
            c.max_deviation
        );
    }
    for c in summary.cells.iter().filter(|c| c.status == CellStatus::Failed) {
        let _ = writeln!(s, "{:<28} FAILED: {}", c.id, c.errors.join("; "));
    }
    Ok(s)
}

/// Paired difference of final log errors, `cell - baseline`: mean, CI
/// half-width and the number of runs where the cell did strictly better.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDiff {
    pub id: String,
    pub final_mean: f64,
    pub final_ci: f64,
    pub diff_mean: f64,
    pub diff_ci: f64,
    pub wins: usize,
}

pub fn paired_against(summary: &ExperimentSummary, baseline: &str) -> Result<Vec<PairedDiff>> {
    let base = summary
        .cell(baseline)
        .filter(|c| c.status == CellStatus::Ok)
        .ok_or_else(|| HarnessError::Config(format!("no successful cell named {baseline:?}")))?;
    let log = |e: f64| e.max(ERROR_FLOOR).log10();
    let mut out = Vec::new();
    for c in summary.cells.iter().filter(|c| c.status == CellStatus::Ok) {
        let diffs: Vec<f64> = c
            .final_errors
            .iter()
            .zip(&base.final_errors)
            .map(|(a, b)| log(*a) - log(*b))
            .collect();
        let (diff_mean, diff_ci) = mean_and_ci(&diffs);
        out.push(PairedDiff {
            id: c.id.clone(),
            final_mean: c.final_mean().unwrap_or(f64::NAN),
            final_ci: c.final_ci().unwrap_or(f64::NAN),
            diff_mean,
            diff_ci,
            wins: diffs.iter().filter(|d| **d < 0.0).count(),
        });
    }
    Ok(out)
}

pub fn compare_table(dir: &Path, baseline: Option<&str>) -> Result<String> {
    let summary = load_summary(dir)?;
    let baseline = match baseline {
        Some(b) => b.to_string(),
        None => summary
            .cells
            .iter()
            .find(|c| c.status == CellStatus::Ok)
            .map(|c| c.id.clone())
            .ok_or_else(|| HarnessError::Config("no successful cells".into()))?,
    };
    let rows = paired_against(&summary, &baseline)?;
    let runs = summary.metadata.runs;
    let mut s = String::new();
    let _ = writeln!(s, "paired final log10 error vs {baseline} ({runs} runs)");
    let _ = writeln!(
        s,
        "{:<28} {:>12} {:>10} {:>12} {:>10} {:>8}",
        "cell", "final mean", "ci", "diff", "diff ci", "wins"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<28} {:>12.4} {:>10.4} {:>12.4} {:>10.4} {:>5}/{runs}",
            r.id, r.final_mean, r.final_ci, r.diff_mean, r.diff_ci, r.wins
        );
    }
    Ok(s)
}
