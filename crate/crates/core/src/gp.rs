//! Exact Gaussian-process regression.
//!
//! The model uses a Matérn 5/2 kernel with one lengthscale per input
//! dimension. Inputs are mapped onto the unit hypercube of the
//! [`SearchSpace`] and targets are standardized before fitting, so
//! [`GpHyperparams`] held by a [`GpModel`] live in those normalized units.
//! Predictions are always reported in the objective's own units.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{contract, Error, Result};
use crate::linalg::{self, Cholesky};
use crate::math::{exp, log, sqrt};
use crate::space::SearchSpace;

const SQRT_5: f64 = 2.236_067_977_499_79;
const LOG_2PI: f64 = 1.837_877_066_409_345_3;

/// Observed pairs `(x_i, y_i)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>], targets: &[f64]) -> Result<Self> {
        contract!(
            rows.len() == targets.len(),
            "{} input rows but {} targets",
            rows.len(),
            targets.len()
        );
        contract!(!rows.is_empty(), "cannot infer dimension from an empty row list");
        let mut data = Self::new(rows[0].len());
        for (x, y) in rows.iter().zip(targets) {
            data.push(x, *y)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        contract!(
            x.len() == self.dim,
            "input has {} coordinates, dataset has {}",
            x.len(),
            self.dim
        );
        contract!(
            y.is_finite() && x.iter().all(|v| v.is_finite()),
            "non-finite observation"
        );
        self.inputs.extend_from_slice(x);
        self.targets.push(y);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn inputs(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.inputs.chunks_exact(self.dim.max(1))
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Kernel and noise parameters, stored in log space.
///
/// The log-parameter vector is laid out as
/// `[ln l_1, .., ln l_D, ln signal_variance, ln noise_variance]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpHyperparams {
    log_params: Vec<f64>,
}

impl GpHyperparams {
    pub fn new(lengthscales: &[f64], signal_variance: f64, noise_variance: f64) -> Result<Self> {
        contract!(!lengthscales.is_empty(), "need at least one lengthscale");
        let mut log_params = Vec::with_capacity(lengthscales.len() + 2);
        for &v in lengthscales
            .iter()
            .chain([signal_variance, noise_variance].iter())
        {
            contract!(
                v > 0.0 && v.is_finite(),
                "hyperparameters must be positive and finite, got {v}"
            );
            log_params.push(log(v));
        }
        Ok(Self { log_params })
    }

    pub fn from_log_params(log_params: Vec<f64>) -> Result<Self> {
        contract!(
            log_params.len() >= 3,
            "log-parameter vector needs D + 2 >= 3 entries"
        );
        contract!(
            log_params.iter().all(|v| v.is_finite()),
            "non-finite log hyperparameter"
        );
        Ok(Self { log_params })
    }

    pub fn dim(&self) -> usize {
        self.log_params.len() - 2
    }

    pub fn log_params(&self) -> &[f64] {
        &self.log_params
    }

    pub fn lengthscales(&self) -> Vec<f64> {
        self.log_params[..self.dim()].iter().map(|v| exp(*v)).collect()
    }

    pub fn signal_variance(&self) -> f64 {
        exp(self.log_params[self.dim()])
    }

    pub fn noise_variance(&self) -> f64 {
        exp(self.log_params[self.dim() + 1])
    }

    fn inv_lengthscales(&self) -> Vec<f64> {
        self.log_params[..self.dim()]
            .iter()
            .map(|v| exp(-*v))
            .collect()
    }
}

/// Matérn 5/2 as a function of the scaled distance `r`.
fn matern52(signal: f64, r: f64) -> f64 {
    let sr = SQRT_5 * r;
    signal * (1.0 + sr + sr * sr / 3.0) * exp(-sr)
}

/// `-(dk/dr) / r`, finite at `r = 0`.
fn matern52_radial(signal: f64, r: f64) -> f64 {
    let sr = SQRT_5 * r;
    signal * (5.0 / 3.0) * (1.0 + sr) * exp(-sr)
}

fn scaled_distance(x: &[f64], x2: &[f64], inv_ls: &[f64]) -> f64 {
    let mut r2 = 0.0;
    for ((a, b), il) in x.iter().zip(x2).zip(inv_ls) {
        let d = (a - b) * il;
        r2 += d * d;
    }
    sqrt(r2)
}

/// Matérn 5/2 covariance between two points.
pub fn kernel_eval(x: &[f64], x2: &[f64], hyper: &GpHyperparams) -> Result<f64> {
    contract!(
        x.len() == hyper.dim() && x2.len() == hyper.dim(),
        "points of length {} and {} against {} lengthscales",
        x.len(),
        x2.len(),
        hyper.dim()
    );
    let r = scaled_distance(x, x2, &hyper.inv_lengthscales());
    Ok(matern52(hyper.signal_variance(), r))
}

/// Log marginal likelihood together with its gradient with respect to
/// [`GpHyperparams::log_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub value: f64,
    pub gradient: Vec<f64>,
}

fn covariance(data: &Dataset, hyper: &GpHyperparams) -> Vec<f64> {
    let n = data.len();
    let inv_ls = hyper.inv_lengthscales();
    let signal = hyper.signal_variance();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = signal;
        for j in 0..i {
            let v = matern52(signal, scaled_distance(data.input(i), data.input(j), &inv_ls));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Factorizes `K + noise I`, adding jitter `1e-8 * signal`, escalated tenfold
/// up to `1e-2 * signal`, when the plain matrix is not numerically positive
/// definite.
fn factorize(mut k: Vec<f64>, n: usize, noise: f64, signal: f64) -> Result<Cholesky> {
    let mut l = Vec::new();
    factorize_into(&mut k, n, noise, signal, &mut l)?;
    Ok(Cholesky::from_factor(n, l))
}

/// As [`factorize`], writing the factor into `l`; the diagonal of `k` is
/// modified.
fn factorize_into(k: &mut [f64], n: usize, noise: f64, signal: f64, l: &mut Vec<f64>) -> Result<()> {
    for i in 0..n {
        k[i * n + i] += noise;
    }
    if linalg::factor_lower(k, n, l) {
        return Ok(());
    }
    let mut jitter = 1e-8 * signal;
    let mut added = 0.0;
    while jitter <= 1e-2 * signal * (1.0 + 1e-12) {
        for i in 0..n {
            k[i * n + i] += jitter - added;
        }
        added = jitter;
        if linalg::factor_lower(k, n, l) {
            return Ok(());
        }
        jitter *= 10.0;
    }
    Err(Error::Numerical(format!(
        "K + noise I not positive definite up to jitter {:e} (n = {n}, signal = {signal:e}, noise = {noise:e})",
        1e-2 * signal
    )))
}

/// Squared coordinate differences for every pair `j < i`, laid out pair-major.
struct PairDiffs {
    sq: Vec<f64>,
}

impl PairDiffs {
    fn new(data: &Dataset) -> Self {
        let n = data.len();
        let mut sq = Vec::with_capacity(n * n.saturating_sub(1) / 2 * data.dim());
        for i in 0..n {
            let xi = data.input(i);
            for j in 0..i {
                sq.extend(xi.iter().zip(data.input(j)).map(|(a, b)| (a - b) * (a - b)));
            }
        }
        Self { sq }
    }
}

/// `log N(y | 0, K + noise I)` and its gradient in log-hyperparameter space.
pub fn log_evidence(data: &Dataset, hyper: &GpHyperparams) -> Result<Evidence> {
    contract!(!data.is_empty(), "log evidence needs at least one observation");
    contract!(
        data.dim() == hyper.dim(),
        "dataset dimension {} does not match {} lengthscales",
        data.dim(),
        hyper.dim()
    );
    evidence_with(
        data,
        &PairDiffs::new(data),
        hyper.log_params(),
        &mut EvidenceWork::default(),
    )
}

/// Buffers reused across evidence evaluations of one ascent.
#[derive(Default)]
struct EvidenceWork {
    k: Vec<f64>,
    l: Vec<f64>,
    m: Vec<f64>,
    kinv: Vec<f64>,
    kv: Vec<f64>,
    radial: Vec<f64>,
}

fn evidence_with(
    data: &Dataset,
    pairs: &PairDiffs,
    log_params: &[f64],
    work: &mut EvidenceWork,
) -> Result<Evidence> {
    let n = data.len();
    let d = data.dim();
    let signal = exp(log_params[d]);
    let noise = exp(log_params[d + 1]);
    let inv_ls2: Vec<f64> = log_params[..d].iter().map(|v| exp(-2.0 * v)).collect();

    // kernel value and radial derivative per pair
    let EvidenceWork {
        k,
        l,
        m,
        kinv,
        kv,
        radial,
    } = work;
    kv.clear();
    radial.clear();
    k.resize(n * n, 0.0);
    let mut p = 0;
    for i in 0..n {
        k[i * n + i] = signal;
        for j in 0..i {
            let sq = &pairs.sq[p * d..(p + 1) * d];
            let r2: f64 = sq.iter().zip(&inv_ls2).map(|(a, b)| a * b).sum();
            let sr = SQRT_5 * sqrt(r2);
            let e = signal * exp(-sr);
            let v = (1.0 + sr + sr * sr / 3.0) * e;
            k[i * n + j] = v;
            kv.push(v);
            radial.push((5.0 / 3.0) * (1.0 + sr) * e);
            p += 1;
        }
    }
    factorize_into(k, n, noise, signal, l)?;
    let y = data.targets();
    let mut alpha = y.to_vec();
    linalg::solve_lower(l, n, &mut alpha);
    linalg::solve_upper(l, n, &mut alpha);
    let fit = linalg::dot(y, &alpha);
    let value = -0.5 * fit - 0.5 * linalg::log_det(l, n) - 0.5 * n as f64 * LOG_2PI;

    // d/dθ = ½ tr((α αᵀ − K⁻¹) dK/dθ)
    linalg::inverse_lower(l, n, m, kinv);
    let mut gradient = vec![0.0; d + 2];
    let mut trace_w = 0.0;
    let mut ls_grad = vec![0.0; d];
    let mut p = 0;
    for i in 0..n {
        let wii = alpha[i] * alpha[i] - kinv[i * n + i];
        trace_w += wii;
        gradient[d] += 0.5 * wii * signal;
        for j in 0..i {
            let w = alpha[i] * alpha[j] - kinv[i * n + j];
            let wr = w * radial[p];
            let sq = &pairs.sq[p * d..(p + 1) * d];
            for (g, s) in ls_grad.iter_mut().zip(sq) {
                *g += wr * s;
            }
            gradient[d] += w * kv[p];
            p += 1;
        }
    }
    for c in 0..d {
        gradient[c] = ls_grad[c] * inv_ls2[c];
    }
    gradient[d + 1] = 0.5 * trace_w * noise;
    Ok(Evidence { value, gradient })
}

/// Settings for [`GpModel::fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Number of gradient-ascent starts; the first is a fixed heuristic (or
    /// the warm start), the rest are drawn log-uniformly.
    pub restarts: usize,
    /// Gradient-ascent iterations per start.
    pub max_iters: usize,
    /// Lower bound on the noise variance in standardized target units.
    pub noise_floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iters: 100,
            noise_floor: 1e-8,
        }
    }
}

/// Box constraints in log space, in unit-cube / standardized units.
fn log_bounds(dim: usize, noise_floor: f64) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![log(1e-3); dim];
    let mut hi = vec![log(1e3); dim];
    lo.push(log(1e-4));
    hi.push(log(1e4));
    lo.push(log(noise_floor));
    hi.push(log(10.0));
    (lo, hi)
}

fn heuristic_start(dim: usize) -> Vec<f64> {
    let mut p = vec![log(0.5); dim];
    p.push(0.0);
    p.push(log(1e-3));
    p
}

fn random_start<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut log_uniform = |lo: f64, hi: f64| log(lo) + rng.gen::<f64>() * (log(hi) - log(lo));
    let mut p: Vec<f64> = (0..dim).map(|_| log_uniform(1e-2, 1e2)).collect();
    p.push(log_uniform(1e-1, 1e1));
    p.push(log_uniform(1e-6, 1e-1));
    p
}

fn project(p: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), h) in p.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
}

/// Projected limited-memory quasi-Newton ascent with Armijo backtracking.
/// Coordinates pinned at a bound with the gradient pointing outward are held
/// fixed for the step.
fn ascend(
    data: &Dataset,
    start: Vec<f64>,
    lo: &[f64],
    hi: &[f64],
    max_iters: usize,
) -> Result<(GpHyperparams, f64)> {
    const MEMORY: usize = 8;
    let pairs = PairDiffs::new(data);
    let mut work = EvidenceWork::default();
    let mut eval = |p: &[f64]| -> Option<Evidence> {
        evidence_with(data, &pairs, p, &mut work)
            .ok()
            .filter(|e| e.value.is_finite())
    };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut x = start;
    project(&mut x, lo, hi);
    let mut cur = eval(&x).ok_or_else(|| {
        Error::Numerical(format!("evidence undefined at start point {x:?}"))
    })?;
    // (s, y) pairs with y = -(g_new - g_old), so s.y > 0 on a concave patch
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();

    for _ in 0..max_iters {
        let free: Vec<bool> = x
            .iter()
            .zip(&cur.gradient)
            .zip(lo.iter().zip(hi))
            .map(|((v, g), (l, h))| !((*v <= *l && *g < 0.0) || (*v >= *h && *g > 0.0)))
            .collect();
        let g: Vec<f64> = cur
            .gradient
            .iter()
            .zip(&free)
            .map(|(g, f)| if *f { *g } else { 0.0 })
            .collect();
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax < 1e-7 {
            break;
        }

        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = history
            .last()
            .map_or(0.5 / gmax, |(s, y, _)| dot(s, y) / dot(y, y));
        for v in q.iter_mut() {
            *v *= gamma;
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q
            .iter()
            .zip(&free)
            .map(|(d, f)| if *f { *d } else { 0.0 })
            .collect();
        if !(dot(&dir, &g) > 0.0) {
            history.clear();
            dir = g.iter().map(|v| v * 0.5 / gmax).collect();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let mut cand: Vec<f64> = x.iter().zip(&dir).map(|(v, d)| v + step * d).collect();
            project(&mut cand, lo, hi);
            let ascent: f64 = cand
                .iter()
                .zip(&x)
                .zip(&cur.gradient)
                .map(|((c, v), g)| (c - v) * g)
                .sum();
            let moved = cand
                .iter()
                .zip(&x)
                .fold(0.0f64, |m, (c, v)| m.max((c - v).abs()));
            if moved < 1e-12 {
                break;
            }
            if let Some(next) = eval(&cand) {
                if next.value >= cur.value + 1e-4 * ascent {
                    accepted = Some((cand, next));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((nx, next)) = accepted else { break };
        let s: Vec<f64> = nx.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next
            .gradient
            .iter()
            .zip(&cur.gradient)
            .map(|(gn, go)| go - gn)
            .collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == MEMORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / sy));
        }
        let gain = next.value - cur.value;
        x = nx;
        cur = next;
        if gain <= 1e-6 * (1.0 + cur.value.abs()) {
            break;
        }
    }
    Ok((GpHyperparams { log_params: x }, cur.value))
}

/// A fitted GP posterior; immutable once built.
#[derive(Debug, Clone)]
pub struct GpModel {
    space: SearchSpace,
    data: Dataset,
    unit: Dataset,
    inv_ls: Vec<f64>,
    signal: f64,
    hyper: GpHyperparams,
    y_mean: f64,
    y_scale: f64,
    chol: Cholesky,
    alpha: Vec<f64>,
    log_evidence: f64,
}

/// Posterior mean and variance plus their gradients with respect to the
/// unit-cube coordinates of the query.
#[derive(Debug, Clone)]
pub(crate) struct PredictionGrad {
    pub mean: f64,
    pub variance: f64,
    pub d_mean: Vec<f64>,
    pub d_variance: Vec<f64>,
}

impl GpModel {
    /// Fits hyperparameters by maximizing the evidence from
    /// `options.restarts` starts and keeps the best.
    pub fn fit<R: Rng + ?Sized>(
        space: &SearchSpace,
        data: &Dataset,
        options: &FitOptions,
        rng: &mut R,
    ) -> Result<Self> {
        Self::fit_from(space, data, options, None, rng)
    }

    /// Like [`fit`](Self::fit), but the first start is `warm` instead of the
    /// fixed heuristic.
    pub fn fit_from<R: Rng + ?Sized>(
        space: &SearchSpace,
        data: &Dataset,
        options: &FitOptions,
        warm: Option<&GpHyperparams>,
        rng: &mut R,
    ) -> Result<Self> {
        contract!(data.len() >= 2, "fitting needs at least 2 observations, got {}", data.len());
        contract!(options.restarts >= 1, "need at least one restart");
        let (unit, y_mean, y_scale) = normalize(space, data)?;
        let dim = space.dim();
        let (lo, hi) = log_bounds(dim, options.noise_floor);

        let mut best: Option<(GpHyperparams, f64)> = None;
        let mut failures: Vec<String> = Vec::new();
        for restart in 0..options.restarts {
            let start = match (restart, warm) {
                (0, Some(w)) if w.dim() == dim => w.log_params.clone(),
                (0, _) => heuristic_start(dim),
                _ => random_start(dim, rng),
            };
            match ascend(&unit, start.clone(), &lo, &hi, options.max_iters) {
                Ok((h, value)) => {
                    if best.as_ref().map_or(true, |(_, b)| value > *b) {
                        best = Some((h, value));
                    }
                }
                Err(_) => failures.push(format!("{start:?}")),
            }
        }
        let Some((hyper, _)) = best else {
            return Err(Error::Numerical(format!(
                "all {} restarts failed to factorize; tried log-hyperparameters {}",
                options.restarts,
                failures.join(", ")
            )));
        };
        Self::assemble(space.clone(), data.clone(), unit, hyper, y_mean, y_scale)
    }

    /// Conditions on `data` with fixed hyperparameters (normalized units).
    pub fn with_hyperparams(
        space: &SearchSpace,
        data: &Dataset,
        hyper: GpHyperparams,
    ) -> Result<Self> {
        contract!(
            hyper.dim() == space.dim(),
            "hyperparameters for {} dims, space has {}",
            hyper.dim(),
            space.dim()
        );
        let (unit, y_mean, y_scale) = normalize(space, data)?;
        Self::assemble(space.clone(), data.clone(), unit, hyper, y_mean, y_scale)
    }

    /// The unconditioned prior: mean 0, variance `signal_variance`.
    pub fn prior(space: &SearchSpace, hyper: GpHyperparams) -> Result<Self> {
        Self::with_hyperparams(space, &Dataset::new(space.dim()), hyper)
    }

    fn assemble(
        space: SearchSpace,
        data: Dataset,
        unit: Dataset,
        hyper: GpHyperparams,
        y_mean: f64,
        y_scale: f64,
    ) -> Result<Self> {
        let n = unit.len();
        let chol = factorize(
            covariance(&unit, &hyper),
            n,
            hyper.noise_variance(),
            hyper.signal_variance(),
        )?;
        let alpha = chol.solve(unit.targets());
        let log_evidence = if n == 0 {
            0.0
        } else {
            let fit: f64 = unit.targets().iter().zip(&alpha).map(|(a, b)| a * b).sum();
            -0.5 * fit - 0.5 * chol.log_det() - 0.5 * n as f64 * LOG_2PI
        };
        Ok(Self {
            space,
            data,
            unit,
            inv_ls: hyper.inv_lengthscales(),
            signal: hyper.signal_variance(),
            hyper,
            y_mean,
            y_scale,
            chol,
            alpha,
            log_evidence,
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Hyperparameters in normalized (unit cube / standardized) units.
    pub fn hyperparams(&self) -> &GpHyperparams {
        &self.hyper
    }

    /// Log evidence of the standardized targets under the fitted model.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    /// Lower-triangular factor of `K + noise I` over the normalized inputs.
    pub fn cholesky_factor(&self) -> &[f64] {
        self.chol.factor()
    }

    /// Posterior predictive mean and variance of the latent function at `x`,
    /// in objective units.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        contract!(
            x.len() == self.space.dim(),
            "query has {} coordinates, model has {}",
            x.len(),
            self.space.dim()
        );
        let (m, v) = self.predict_unit(&self.space.to_unit(x));
        Ok((m, v))
    }

    /// Standardized mean and variance before clamping, reusing `ks` as scratch.
    fn predict_unit_raw_in(&self, u: &[f64], ks: &mut Vec<f64>) -> (f64, f64) {
        let signal = self.signal;
        ks.clear();
        ks.extend(
            self.unit
                .inputs()
                .map(|xi| matern52(signal, scaled_distance(u, xi, &self.inv_ls))),
        );
        let mean: f64 = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        self.chol.solve_lower_in_place(ks);
        let reduction: f64 = ks.iter().map(|v| v * v).sum();
        (mean, signal - reduction)
    }

    /// Mean and clamped variance in objective units, reusing `scratch`.
    pub(crate) fn predict_unit_in(&self, u: &[f64], scratch: &mut Vec<f64>) -> (f64, f64) {
        let (m, v) = self.predict_unit_raw_in(u, scratch);
        (
            self.y_mean + self.y_scale * m,
            self.y_scale * self.y_scale * v.max(0.0),
        )
    }

    pub(crate) fn predict_unit(&self, u: &[f64]) -> (f64, f64) {
        self.predict_unit_in(u, &mut Vec::new())
    }

    pub(crate) fn predict_unit_grad(&self, u: &[f64]) -> PredictionGrad {
        let d = self.space.dim();
        let n = self.unit.len();
        let inv_ls = &self.inv_ls;
        let signal = self.signal;
        let mut ks = Vec::with_capacity(n);
        // dk_i/du_c stored row-major n x d
        let mut dks = vec![0.0; n * d];
        for (i, xi) in self.unit.inputs().take(n).enumerate() {
            let r = scaled_distance(u, xi, inv_ls);
            ks.push(matern52(signal, r));
            let radial = matern52_radial(signal, r);
            for c in 0..d {
                dks[i * d + c] = -radial * (u[c] - xi[c]) * inv_ls[c] * inv_ls[c];
            }
        }
        let mean: f64 = ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let mut w = ks.clone();
        self.chol.solve_lower_in_place(&mut w);
        let reduction: f64 = w.iter().map(|v| v * v).sum();
        self.chol.solve_upper_in_place(&mut w);
        let var_raw = signal - reduction;

        let mut d_mean = vec![0.0; d];
        let mut d_var = vec![0.0; d];
        for i in 0..n {
            for c in 0..d {
                d_mean[c] += self.alpha[i] * dks[i * d + c];
                d_var[c] -= 2.0 * w[i] * dks[i * d + c];
            }
        }
        let s2 = self.y_scale * self.y_scale;
        let clamped = var_raw <= 0.0;
        PredictionGrad {
            mean: self.y_mean + self.y_scale * mean,
            variance: s2 * var_raw.max(0.0),
            d_mean: d_mean.into_iter().map(|g| g * self.y_scale).collect(),
            d_variance: d_var
                .into_iter()
                .map(|g| if clamped { 0.0 } else { g * s2 })
                .collect(),
        }
    }
}

/// Maps inputs into the unit cube and standardizes targets.
fn normalize(space: &SearchSpace, data: &Dataset) -> Result<(Dataset, f64, f64)> {
    contract!(
        data.dim() == space.dim(),
        "dataset has {} dims, space has {}",
        data.dim(),
        space.dim()
    );
    let n = data.len();
    let mut unit = Dataset::new(space.dim());
    if n == 0 {
        return Ok((unit, 0.0, 1.0));
    }
    let y = data.targets();
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let sd = sqrt(var);
    let scale = if sd > 1e-12 * mean.abs().max(1.0) { sd } else { 1.0 };
    for (i, x) in data.inputs().take(n).enumerate() {
        unit.push(&space.to_unit(x), (y[i] - mean) / scale)?;
    }
    Ok((unit, mean, scale))
}
