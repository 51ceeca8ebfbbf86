//! Aggregate statistics over repeated runs.

use portfolio_bo::portfolio::SelectionTrace;

use crate::error::{HarnessError, Result};

/// Errors below this are clamped before taking logarithms.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Mean and `s / sqrt(n)` with `s` the sample standard deviation; the
/// half-width is zero for fewer than two values.
pub fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let m = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (m, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

/// Per-iteration mean of `log10(max(error, ERROR_FLOOR))` across runs, and the
/// half-width `s / sqrt(R)` with `s` the sample standard deviation (zero when
/// `R = 1`). Rows are runs; all rows must have the same length.
pub fn mean_log_error(errors: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let runs = errors.len();
    let width = errors.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; width];
    let mut ci = vec![0.0; width];
    if runs == 0 {
        return (mean, ci);
    }
    let logs: Vec<Vec<f64>> = errors
        .iter()
        .map(|row| {
            assert_eq!(row.len(), width, "ragged error matrix");
            row.iter().map(|e| e.max(ERROR_FLOOR).log10()).collect()
        })
        .collect();
    let mut column = vec![0.0; runs];
    for t in 0..width {
        for (c, r) in column.iter_mut().zip(&logs) {
            *c = r[t];
        }
        (mean[t], ci[t]) = mean_and_ci(&column);
    }
    (mean, ci)
}

/// Empirical frequency with which each acquisition was chosen.
pub fn selection_frequency<'a, I>(traces: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a SelectionTrace>,
{
    let mut counts: Vec<usize> = Vec::new();
    let mut total = 0usize;
    for t in traces {
        if counts.is_empty() {
            counts = vec![0; t.probabilities.len()];
        }
        if t.chosen >= counts.len() || t.probabilities.len() != counts.len() {
            return Err(HarnessError::Config(format!(
                "trace at iteration {} does not match a {}-acquisition portfolio",
                t.iteration,
                counts.len()
            )));
        }
        counts[t.chosen] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(HarnessError::Config("selection frequency of an empty trace list".into()));
    }
    Ok(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

/// Per-iteration mean of the selection probabilities across runs; `traces[r]`
/// holds run `r`'s traces in iteration order.
pub fn mean_probabilities(traces: &[Vec<&SelectionTrace>]) -> Vec<Vec<f64>> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    let steps = first.len();
    let j = first.first().map_or(0, |t| t.probabilities.len());
    (0..steps)
        .map(|t| {
            let mut acc = vec![0.0; j];
            let mut n = 0;
            for run in traces.iter().filter(|r| r.len() > t) {
                for (a, p) in acc.iter_mut().zip(&run[t].probabilities) {
                    *a += p;
                }
                n += 1;
            }
            acc.into_iter().map(|a| a / n as f64).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use portfolio_bo::portfolio::select_nominee;
    use rand::SeedableRng;

    fn trace(chosen: usize, j: usize) -> SelectionTrace {
        SelectionTrace {
            iteration: 1,
            probabilities: vec![1.0 / j as f64; j],
            chosen,
            nominees: vec![vec![0.0]; j],
            rewards: vec![0.0; j],
            normalized_rewards: None,
        }
    }

    #[test]
    fn identical_runs_have_zero_ci() {
        let (m, ci) = mean_log_error(&[vec![1.0, 0.1], vec![1.0, 0.1], vec![1.0, 0.1]]);
        assert_eq!(ci, vec![0.0, 0.0]);
        assert!((m[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_runs_hand_arithmetic() {
        let (m, ci) = mean_log_error(&[vec![10.0], vec![1000.0]]);
        assert!((m[0] - 2.0).abs() < 1e-12);
        assert!((ci[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_error_hits_the_floor() {
        let (m, _) = mean_log_error(&[vec![0.0]]);
        assert_eq!(m[0], -12.0);
    }

    #[test]
    fn single_choice() {
        assert_eq!(selection_frequency(&[trace(0, 3)]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(selection_frequency(&[]).is_err());
    }

    #[test]
    fn uniform_choices_concentrate_near_a_third() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let uniform = [1.0 / 3.0; 3];
        let traces: Vec<SelectionTrace> = (0..10_000)
            .map(|_| trace(select_nominee(&uniform, &mut rng), 3))
            .collect();
        let f = selection_frequency(&traces).unwrap();
        assert!(f.iter().all(|v| (0.323..=0.343).contains(v)), "{f:?}");
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
