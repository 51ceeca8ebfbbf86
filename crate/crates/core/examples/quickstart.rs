//! Minimizes a benchmark with No-PASt-BO and prints the best-so-far trace.
//!
//! Run with: `cargo run --release -p portfolio-bo --example quickstart -- hartmann6 100`

use portfolio_bo::acquisition::AcquisitionSpec;
use portfolio_bo::benchmarks;
use portfolio_bo::bo::{run_bo, RunConfig};
use portfolio_bo::portfolio::PortfolioState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "branin".to_string());
    let iterations: usize = args.next().map_or(Ok(30), |s| s.parse())?;
    let bench = benchmarks::by_name(&name).ok_or("unknown benchmark")?;

    let specs = vec![
        AcquisitionSpec::pi(0.01)?,
        AcquisitionSpec::ei(0.01)?,
        AcquisitionSpec::lcb(0.2, 0.1)?,
    ];
    let portfolio = PortfolioState::no_past_bo(specs, 4.0, 0.7)?;
    let config = RunConfig::new(bench.space.clone(), portfolio, iterations, 0);

    let start = std::time::Instant::now();
    let record = run_bo(config, |x| bench.evaluate(x)).map_err(|f| f.error.to_string())?;
    for e in record.evaluations.iter().filter(|e| e.iteration % 10 == 0) {
        println!("t={:>3} best={:.6}", e.iteration, e.best_so_far);
    }
    let (x, y) = record.incumbent().expect("nonempty record");
    println!("best {y:.6} at {x:?} (f_min {}) in {:.2?}", bench.f_min, start.elapsed());
    Ok(())
}
