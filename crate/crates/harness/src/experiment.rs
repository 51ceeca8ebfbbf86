//! Runs every cell of an experiment and writes its artifacts.
//!
//! Layout under `config.out`:
//!
//! ```text
//! summary.json
//! convergence.svg            (optional)
//! <cell>/runs.csv            one row per evaluation
//! <cell>/curve.csv           iteration, mean log10 error, ci
//! <cell>/probabilities.csv   iteration, mean p_1..p_J (portfolio cells)
//! ```

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use portfolio_bo::benchmarks::{by_name, Benchmark};
use portfolio_bo::bo::{run_bo, simple_error, RunConfig, RunRecord, DEFAULT_INITIAL_POINTS};
use serde::{Deserialize, Serialize};

use crate::artifacts;
use crate::config::{CellSpec, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::stats::{mean_log_error, mean_probabilities, selection_frequency, ERROR_FLOOR};

pub const PAIRING: &str =
    "run k of every cell uses seed base_seed + k, so all cells share the same initial designs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub benchmark: String,
    pub f_min: f64,
    pub dim: usize,
    pub portfolio_size: usize,
    pub runs: usize,
    pub iterations: usize,
    pub initial_points: usize,
    pub base_seed: u64,
    pub log_base: f64,
    pub error_floor: f64,
    /// CI half-width is `ci_multiplier * s / sqrt(R)`.
    pub ci_multiplier: f64,
    pub pairing: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub id: String,
    pub strategy: String,
    pub memory: Option<f64>,
    pub eta: Option<f64>,
    pub acquisitions: Vec<String>,
    pub status: CellStatus,
    /// One message per failed run.
    pub errors: Vec<String>,
    /// Indexed by iteration, 0 being the end of the initial design.
    pub mean_log_error: Vec<f64>,
    pub ci: Vec<f64>,
    /// Simple error at the last iteration, per run.
    pub final_errors: Vec<f64>,
    /// Empty for single-acquisition cells.
    pub selection_frequency: Vec<f64>,
}

impl CellSummary {
    pub fn final_mean(&self) -> Option<f64> {
        self.mean_log_error.last().copied()
    }

    pub fn final_ci(&self) -> Option<f64> {
        self.ci.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub metadata: Metadata,
    pub cells: Vec<CellSummary>,
}

impl ExperimentSummary {
    pub fn cell(&self, id: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.id == id)
    }
}

/// Outcome of one seeded run: the record, plus the error if it stopped early.
pub type RunOutcome = (RunRecord, Option<String>);

/// Runs `cell` once with seed `seed`.
pub fn run_once(cell: &CellSpec, bench: &Benchmark, iterations: usize, seed: u64) -> Result<RunOutcome> {
    let config = RunConfig::new(bench.space.clone(), cell.portfolio()?, iterations, seed);
    Ok(match run_bo(config, |x| bench.evaluate(x)) {
        Ok(record) => (record, None),
        Err(failure) => (failure.partial, Some(failure.error.to_string())),
    })
}

/// Executes all cells and runs, writes artifacts, and returns the summary.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    let cells = config.cells()?;
    let bench = by_name(&config.benchmark).expect("validated");
    let runs = config.runs;

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..runs).map(move |r| (c, r)))
        .collect();
    let results: Vec<Mutex<Option<Result<RunOutcome>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = match config.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(jobs.len())
    .max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(c, r)) = jobs.get(i) else { break };
                let outcome = run_once(&cells[c], &bench, config.iters, config.seed.wrapping_add(r as u64));
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    let mut results = results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every job ran"));

    let out = &config.out;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let metadata = Metadata {
        benchmark: bench.name.to_string(),
        f_min: bench.f_min,
        dim: bench.dim(),
        portfolio_size: config.portfolio,
        runs,
        iterations: config.iters,
        initial_points: DEFAULT_INITIAL_POINTS,
        base_seed: config.seed,
        log_base: 10.0,
        error_floor: ERROR_FLOOR,
        ci_multiplier: 1.0,
        pairing: PAIRING.to_string(),
    };

    let mut summaries = Vec::with_capacity(cells.len());
    for cell in &cells {
        let outcomes: Vec<RunOutcome> = results.by_ref().take(runs).collect::<Result<_>>()?;
        let dir = out.join(&cell.id);
        std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        let records: Vec<&RunRecord> = outcomes.iter().map(|(r, _)| r).collect();
        artifacts::write_runs_csv(&dir.join("runs.csv"), cell, bench.dim(), &records)?;
        let summary = summarize_cell(cell, bench.f_min, &outcomes)?;
        if summary.status == CellStatus::Ok {
            artifacts::write_curve_csv(&dir.join("curve.csv"), &summary.mean_log_error, &summary.ci)?;
            if cell.strategy.is_portfolio() {
                let traces: Vec<Vec<_>> = records.iter().map(|r| r.traces().collect()).collect();
                artifacts::write_probabilities_csv(&dir.join("probabilities.csv"), &mean_probabilities(&traces))?;
            }
        }
        summaries.push(summary);
    }

    let summary = ExperimentSummary {
        metadata,
        cells: summaries,
    };
    artifacts::write_summary(&out.join("summary.json"), &summary)?;
    if config.svg {
        artifacts::write_svg(&out.join("convergence.svg"), &summary)?;
    }
    Ok(summary)
}

fn summarize_cell(cell: &CellSpec, f_min: f64, outcomes: &[RunOutcome]) -> Result<CellSummary> {
    let errors: Vec<String> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(k, (_, e))| e.as_ref().map(|e| format!("run {k}: {e}")))
        .collect();
    let mut summary = CellSummary {
        id: cell.id.clone(),
        strategy: cell.strategy.to_string(),
        memory: cell.memory,
        eta: cell.eta,
        acquisitions: cell.labels(),
        status: if errors.is_empty() { CellStatus::Ok } else { CellStatus::Failed },
        errors,
        mean_log_error: Vec::new(),
        ci: Vec::new(),
        final_errors: Vec::new(),
        selection_frequency: Vec::new(),
    };
    if summary.status == CellStatus::Failed {
        return Ok(summary);
    }
    let matrix: Vec<Vec<f64>> = outcomes
        .iter()
        .map(|(r, _)| simple_error(r, Some(f_min)))
        .collect::<std::result::Result<_, _>>()?;
    let (mean, ci) = mean_log_error(&matrix);
    summary.mean_log_error = mean;
    summary.ci = ci;
    summary.final_errors = matrix.iter().map(|row| *row.last().expect("nonempty")).collect();
    if cell.strategy.is_portfolio() {
        summary.selection_frequency = selection_frequency(outcomes.iter().flat_map(|(r, _)| r.traces()))?;
    }
    Ok(summary)
}

/// Reads a `summary.json` written by [`run_experiment`].
pub fn load_summary(dir: &Path) -> Result<ExperimentSummary> {
    artifacts::read_summary(&dir.join("summary.json"))
}
