//! File formats: per-evaluation CSV, plot data, summary JSON, SVG.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use portfolio_bo::bo::RunRecord;

use crate::config::CellSpec;
use crate::error::{HarnessError, Result};
use crate::experiment::{CellStatus, ExperimentSummary};

/// `run_id,iteration,phase,chosen_acq,x_1..x_D,y,best_so_far,p_1..p_J`.
pub fn runs_header(dim: usize, acquisitions: usize) -> Vec<String> {
    let mut h: Vec<String> = ["run_id", "iteration", "phase", "chosen_acq"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=dim).map(|i| format!("x_{i}")));
    h.push("y".into());
    h.push("best_so_far".into());
    h.extend((1..=acquisitions).map(|j| format!("p_{j}")));
    h
}

pub fn write_runs_csv(path: &Path, cell: &CellSpec, dim: usize, records: &[&RunRecord]) -> Result<()> {
    let labels = cell.labels();
    let j = labels.len();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(runs_header(dim, j))?;
    let mut row: Vec<String> = Vec::with_capacity(6 + dim + j);
    for (run_id, record) in records.iter().enumerate() {
        for e in &record.evaluations {
            row.clear();
            row.push(run_id.to_string());
            row.push(e.iteration.to_string());
            match &e.selection {
                None => {
                    row.push("init".into());
                    row.push(String::new());
                }
                Some(t) => {
                    row.push("bo".into());
                    row.push(labels[t.chosen].clone());
                }
            }
            row.extend(e.x.iter().map(|v| v.to_string()));
            row.push(e.y.to_string());
            row.push(e.best_so_far.to_string());
            match &e.selection {
                None => row.extend(std::iter::repeat(String::new()).take(j)),
                Some(t) => row.extend(t.probabilities.iter().map(|p| p.to_string())),
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// One run as read back from `runs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRun {
    pub run_id: usize,
    pub rows: usize,
    /// Best-so-far at the end of the design, then after each BO iteration.
    pub best_by_iteration: Vec<f64>,
    pub chosen: Vec<String>,
    pub points: Vec<Vec<f64>>,
}

/// Parses a `runs.csv`, checking the header against its own column counts.
pub fn read_runs_csv(path: &Path) -> Result<Vec<CsvRun>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let dim = header.iter().filter(|h| h.starts_with("x_")).count();
    let j = header.iter().filter(|h| h.starts_with("p_")).count();
    if header != runs_header(dim, j) {
        return Err(HarnessError::artifact(path, format!("unexpected header {header:?}")));
    }
    let bad = |line: usize, what: &str| HarnessError::artifact(path, format!("row {line}: {what}"));
    let mut runs: Vec<CsvRun> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| bad(line, &format!("column {} is not a number", header[i])))
        };
        let run_id: usize = rec[0].parse().map_err(|_| bad(line, "bad run_id"))?;
        let phase = &rec[2];
        if runs.last().map_or(true, |r| r.run_id != run_id) {
            runs.push(CsvRun {
                run_id,
                rows: 0,
                best_by_iteration: Vec::new(),
                chosen: Vec::new(),
                points: Vec::new(),
            });
        }
        let run = runs.last_mut().expect("just pushed");
        run.rows += 1;
        run.points.push((0..dim).map(|d| num(4 + d)).collect::<Result<_>>()?);
        let best = num(4 + dim + 1)?;
        match phase {
            "init" => match run.best_by_iteration.len() {
                0 => run.best_by_iteration.push(best),
                1 if run.chosen.is_empty() => run.best_by_iteration[0] = best,
                _ => return Err(bad(line, "init row after bo rows")),
            },
            "bo" => {
                run.best_by_iteration.push(best);
                run.chosen.push(rec[3].to_string());
            }
            other => return Err(bad(line, &format!("unknown phase {other:?}"))),
        }
    }
    Ok(runs)
}

pub fn write_curve_csv(path: &Path, mean: &[f64], ci: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "mean_log10_error", "ci"])?;
    for (t, (m, c)) in mean.iter().zip(ci).enumerate() {
        w.write_record([t.to_string(), m.to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Mean selection probabilities; row `t` is iteration `t + 1`.
pub fn write_probabilities_csv(path: &Path, probabilities: &[Vec<f64>]) -> Result<()> {
    let j = probabilities.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=j).map(|k| format!("p_{k}")));
    w.write_record(&header)?;
    for (t, p) in probabilities.iter().enumerate() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(p.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, summary)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<ExperimentSummary> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Mean log10 error per cell with a shaded CI band.
pub fn write_svg(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let (w, h, pad) = (720.0, 440.0, 56.0);
    let cells: Vec<_> = summary.cells.iter().filter(|c| c.status == CellStatus::Ok).collect();
    let t_max = summary.metadata.iterations.max(1) as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in &cells {
        for (m, ci) in c.mean_log_error.iter().zip(&c.ci) {
            lo = lo.min(m - ci);
            hi = hi.max(m + ci);
        }
    }
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let x = |t: f64| pad + t / t_max * (w - 2.0 * pad);
    let y = |v: f64| h - pad - (v - lo) / (hi - lo) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{} (portfolio {}, R = {})</text>"#,
        w / 2.0,
        summary.metadata.benchmark,
        summary.metadata.portfolio_size,
        summary.metadata.runs
    );
    let _ = writeln!(
        s,
        r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#, w / 2.0, h - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">mean log10 error</text>"#,
        h / 2.0,
        h / 2.0
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, pad - 4.0, y(v) + 4.0);
        let t = t_max * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{t:.0}</text>"#, x(t), h - pad + 16.0);
    }
    for (i, c) in cells.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let n = c.mean_log_error.len();
        let mut band = String::new();
        for t in 0..n {
            let _ = write!(band, "{:.1},{:.1} ", x(t as f64), y(c.mean_log_error[t] + c.ci[t]));
        }
        for t in (0..n).rev() {
            let _ = write!(band, "{:.1},{:.1} ", x(t as f64), y(c.mean_log_error[t] - c.ci[t]));
        }
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15"/>"#, band.trim_end());
        let line: Vec<String> = c
            .mean_log_error
            .iter()
            .enumerate()
            .map(|(t, m)| format!("{:.1},{:.1}", x(t as f64), y(*m)))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        let ly = pad + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            w - pad - 4.0,
            c.id
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s).map_err(|e| HarnessError::io(path, e))
}
