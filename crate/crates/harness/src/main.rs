use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use portfolio_bo_harness::report::{compare_table, summarize_table};
use portfolio_bo_harness::{run_experiment, CellStatus, ExperimentConfig, Result, StrategyName};

#[derive(Parser)]
#[command(name = "portfolio-bo", version, about = "Benchmark runner for portfolio Bayesian optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run(RunArgs),
    /// Recompute statistics from the CSVs of a finished experiment.
    Summarize {
        /// Experiment output directory.
        dir: PathBuf,
    },
    /// Paired final-error table across the cells of an experiment.
    Compare {
        dir: PathBuf,
        /// Cell id to compare against (default: the first cell).
        #[arg(long)]
        baseline: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// branin, hartmann3 or hartmann6.
    #[arg(long)]
    benchmark: Option<String>,
    /// gp-hedge, no-past-bo, random, pi, ei, lcb (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<StrategyName>,
    /// Portfolio size: 3 or 9.
    #[arg(long)]
    portfolio: Option<usize>,
    /// No-PASt-BO memory factors (comma separated).
    #[arg(long, value_delimiter = ',')]
    memory: Vec<f64>,
    /// Softmax temperatures for the hedging strategies (comma separated).
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Base seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel runs (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Also write convergence.svg.
    #[arg(long)]
    svg: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.benchmark {
            c.benchmark = v;
        }
        if !self.strategy.is_empty() {
            c.strategies = self.strategy;
        }
        if let Some(v) = self.portfolio {
            c.portfolio = v;
        }
        if !self.memory.is_empty() {
            c.memory = self.memory;
        }
        if !self.eta.is_empty() {
            c.eta = self.eta;
        }
        if let Some(v) = self.runs {
            c.runs = v;
        }
        if let Some(v) = self.iters {
            c.iters = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.out {
            c.out = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        c.svg |= self.svg;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let config = args.into_config()?;
            let summary = run_experiment(&config)?;
            let mut ok = true;
            for cell in &summary.cells {
                match cell.status {
                    CellStatus::Ok => println!(
                        "{:<28} final mean log10 error {:>9.4} +/- {:.4}",
                        cell.id,
                        cell.final_mean().unwrap_or(f64::NAN),
                        cell.final_ci().unwrap_or(f64::NAN)
                    ),
                    CellStatus::Failed => {
                        ok = false;
                        println!("{:<28} FAILED: {}", cell.id, cell.errors.join("; "));
                    }
                }
            }
            println!("artifacts in {}", config.out.display());
            Ok(ok)
        }
        Command::Summarize { dir } => {
            print!("{}", summarize_table(&dir)?);
            Ok(true)
        }
        Command::Compare { dir, baseline } => {
            print!("{}", compare_table(&dir, baseline.as_deref())?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
