use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use portfolio_bo_harness::report::recompute;
use portfolio_bo_harness::{run_experiment, CellStatus, ExperimentConfig, StrategyName};

fn out_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn small(name: &str, strategies: Vec<StrategyName>) -> ExperimentConfig {
    ExperimentConfig {
        benchmark: "branin".into(),
        strategies,
        runs: 2,
        iters: 3,
        seed: 7,
        out: out_dir(name),
        workers: 2,
        ..Default::default()
    }
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn random_cell_row_count_and_schema() {
    let config = small("rows", vec![StrategyName::Random]);
    run_experiment(&config).unwrap();
    let text = std::fs::read_to_string(config.out.join("random/runs.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "run_id,iteration,phase,chosen_acq,x_1,x_2,y,best_so_far,p_1,p_2,p_3"
    );
    assert_eq!(lines.len() - 1, 2 * (5 + 3));
    let init = lines[1..].iter().filter(|l| l.split(',').nth(2) == Some("init")).count();
    assert_eq!(init, 2 * 5);
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 11, "{l}");
    }
}

#[test]
fn rerun_is_byte_identical() {
    let mut a = small("rerun_a", vec![StrategyName::GpHedge, StrategyName::NoPastBo, StrategyName::Lcb]);
    a.svg = true;
    let mut b = a.clone();
    b.out = out_dir("rerun_b");
    b.workers = 1;
    run_experiment(&a).unwrap();
    run_experiment(&b).unwrap();
    let (ta, tb) = (read_tree(&a.out), read_tree(&b.out));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (path, bytes) in &ta {
        assert!(bytes == &tb[path], "{} differs", path.display());
    }
}

#[test]
fn memory_sweep_gives_one_cell_per_factor() {
    let mut config = small("sweep", vec![StrategyName::NoPastBo]);
    config.memory = vec![0.7, 1.0];
    let summary = run_experiment(&config).unwrap();
    let ids: Vec<&str> = summary.cells.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["no-past-bo_m0.7_eta4", "no-past-bo_m1_eta4"]);
    for id in ids {
        assert!(config.out.join(id).join("runs.csv").is_file());
        assert!(config.out.join(id).join("curve.csv").is_file());
        assert!(config.out.join(id).join("probabilities.csv").is_file());
    }
}

/// Mean log10 error and CI rebuilt from runs.csv with nothing but string
/// splitting, checked against summary.json.
#[test]
fn summary_matches_independent_recomputation() {
    let mut config = small("recompute", vec![StrategyName::GpHedge, StrategyName::Pi, StrategyName::Random]);
    config.runs = 4;
    config.iters = 6;
    let summary = run_experiment(&config).unwrap();
    let f_min = summary.metadata.f_min;
    for cell in &summary.cells {
        assert_eq!(cell.status, CellStatus::Ok);
        let text = std::fs::read_to_string(config.out.join(&cell.id).join("runs.csv")).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        let best_col = header.iter().position(|h| *h == "best_so_far").unwrap();
        // run -> (last init best, bo bests)
        let mut per_run: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let run: usize = f[0].parse().unwrap();
            let best: f64 = f[best_col].parse().unwrap();
            let v = per_run.entry(run).or_default();
            if f[2] == "init" {
                v.clear();
                v.push(best);
            } else {
                v.push(best);
            }
        }
        let r = per_run.len() as f64;
        assert_eq!(per_run.len(), 4);
        for t in 0..=6 {
            let logs: Vec<f64> = per_run
                .values()
                .map(|v| (v[t] - f_min).max(0.0).max(1e-12).log10())
                .collect();
            let mean = logs.iter().sum::<f64>() / r;
            let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (r - 1.0);
            let ci = var.sqrt() / r.sqrt();
            assert!((mean - cell.mean_log_error[t]).abs() < 1e-10, "{} t={t}", cell.id);
            assert!((ci - cell.ci[t]).abs() < 1e-10, "{} t={t}", cell.id);
        }
        if cell.strategy == "pi" {
            assert!(cell.selection_frequency.is_empty());
        } else {
            assert!((cell.selection_frequency.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
    let (_, rebuilt) = recompute(&config.out).unwrap();
    assert!(rebuilt.iter().all(|c| c.max_deviation < 1e-10 && c.rows_per_run == vec![11; 4]));
}

#[test]
fn nine_function_portfolio_columns() {
    let mut config = small("nine", vec![StrategyName::NoPastBo]);
    config.portfolio = 9;
    config.runs = 1;
    let summary = run_experiment(&config).unwrap();
    assert_eq!(summary.cells[0].acquisitions.len(), 9);
    assert_eq!(summary.cells[0].selection_frequency.len(), 9);
    let text = std::fs::read_to_string(config.out.join("no-past-bo_m0.7_eta4/runs.csv")).unwrap();
    assert!(text.lines().next().unwrap().ends_with("p_8,p_9"));
}

#[test]
fn toml_config_drives_a_run() {
    let dir = out_dir("toml");
    let text = format!(
        "benchmark = \"hartmann3\"\nstrategies = [\"ei\"]\nruns = 1\niters = 2\nout = {:?}\n",
        dir.display().to_string()
    );
    let config = ExperimentConfig::from_toml_str(&text).unwrap();
    let summary = run_experiment(&config).unwrap();
    assert_eq!(summary.metadata.benchmark, "hartmann3");
    assert_eq!(summary.metadata.dim, 3);
    assert!(dir.join("summary.json").is_file());
}
