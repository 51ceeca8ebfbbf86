//! Acquisition utilities and their inner maximizer.
//!
//! Every utility here is something to maximize while the objective is
//! minimized: PI and EI reward low posterior means as written, and GP-LCB is
//! reported as `kappa * sigma - mean`, the negation of the bound itself.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{contract, Result};
use crate::gp::GpModel;
use crate::math::{log, norm_cdf, norm_pdf, sqrt};
use crate::qmc::shifted_kronecker;

/// One member of a portfolio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcquisitionSpec {
    /// Probability of improvement with trade-off `xi >= 0`.
    Pi { xi: f64 },
    /// Expected improvement with trade-off `xi >= 0`.
    Ei { xi: f64 },
    /// GP-LCB with `kappa = sqrt(nu * beta_t)`.
    Lcb { nu: f64, delta: f64 },
}

impl AcquisitionSpec {
    pub fn pi(xi: f64) -> Result<Self> {
        Self::Pi { xi }.validated()
    }

    pub fn ei(xi: f64) -> Result<Self> {
        Self::Ei { xi }.validated()
    }

    pub fn lcb(nu: f64, delta: f64) -> Result<Self> {
        Self::Lcb { nu, delta }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Pi { xi } | Self::Ei { xi } => {
                contract!(xi >= 0.0 && xi.is_finite(), "xi must be >= 0, got {xi}")
            }
            Self::Lcb { nu, delta } => {
                contract!(nu > 0.0 && nu.is_finite(), "nu must be > 0, got {nu}");
                contract!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1), got {delta}");
            }
        }
        Ok(self)
    }

    /// Short, comma-free label such as `ei(xi=0.01)`.
    pub fn label(&self) -> String {
        match self {
            Self::Pi { xi } => format!("pi(xi={xi})"),
            Self::Ei { xi } => format!("ei(xi={xi})"),
            Self::Lcb { nu, delta } => format!("lcb(nu={nu};delta={delta})"),
        }
    }

    /// Utility at a point with posterior `mean` and `variance`.
    pub fn utility(&self, mean: f64, variance: f64, ctx: &UtilityContext) -> f64 {
        match *self {
            Self::Pi { xi } => pi_utility(mean, variance, ctx.mu_minus, xi),
            Self::Ei { xi } => ei_utility(mean, variance, ctx.mu_minus, xi),
            Self::Lcb { nu, delta } => lcb_utility(mean, variance, ctx.t, ctx.dim, nu, delta),
        }
    }

    /// Partial derivatives of the utility with respect to `(mean, sigma)`.
    pub fn utility_gradient(&self, mean: f64, sigma: f64, ctx: &UtilityContext) -> (f64, f64) {
        match *self {
            Self::Pi { xi } => pi_gradient(mean, sigma, ctx.mu_minus, xi),
            Self::Ei { xi } => ei_gradient(mean, sigma, ctx.mu_minus, xi),
            Self::Lcb { nu, delta } => (-1.0, lcb_kappa(ctx.t, ctx.dim, nu, delta)),
        }
    }
}

/// What a utility needs besides the posterior at the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityContext {
    /// Minimum posterior mean over evaluated inputs.
    pub mu_minus: f64,
    /// BO iteration, starting at 1.
    pub t: usize,
    pub dim: usize,
}

/// Best-so-far bookkeeping derived from a fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    /// `min_i mu(x_i)` over the evaluated inputs, under the current model.
    pub best_posterior_mean: f64,
    /// Evaluated input with the lowest observed value.
    pub best_point: Vec<f64>,
    pub best_observed: f64,
}

impl Incumbent {
    pub fn from_model(model: &GpModel) -> Result<Self> {
        let data = model.data();
        contract!(!data.is_empty(), "incumbent needs at least one evaluated point");
        let mut mu_minus = f64::INFINITY;
        for x in data.inputs() {
            let (m, _) = model.predict(x)?;
            mu_minus = mu_minus.min(m);
        }
        let (best, y) = data
            .targets()
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &y)| if y < acc.1 { (i, y) } else { acc });
        Ok(Self {
            best_posterior_mean: mu_minus,
            best_point: data.input(best).to_vec(),
            best_observed: y,
        })
    }
}

/// `Phi((mu_minus - xi - mean) / sigma)`, with the step-function limit at
/// `sigma = 0`.
pub fn pi_utility(mean: f64, variance: f64, mu_minus: f64, xi: f64) -> f64 {
    let sigma = sqrt(variance.max(0.0));
    let tau = mu_minus - xi - mean;
    if sigma > 0.0 {
        norm_cdf(tau / sigma)
    } else if tau > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `tau Phi(tau/sigma) + sigma phi(tau/sigma)`; zero when `sigma = 0`.
pub fn ei_utility(mean: f64, variance: f64, mu_minus: f64, xi: f64) -> f64 {
    let sigma = sqrt(variance.max(0.0));
    if !(sigma > 0.0) {
        return 0.0;
    }
    let tau = mu_minus - xi - mean;
    let z = tau / sigma;
    (tau * norm_cdf(z) + sigma * norm_pdf(z)).max(0.0)
}

/// `beta_t = 2 log(t^(D/2 + 2) pi^2 / (3 delta))`.
pub fn beta_t(t: usize, dim: usize, delta: f64) -> f64 {
    let pi2 = core::f64::consts::PI * core::f64::consts::PI;
    2.0 * ((dim as f64 / 2.0 + 2.0) * log(t.max(1) as f64) + log(pi2 / (3.0 * delta)))
}

fn lcb_kappa(t: usize, dim: usize, nu: f64, delta: f64) -> f64 {
    sqrt((nu * beta_t(t, dim, delta)).max(0.0))
}

/// `kappa sigma - mean`; maximizing it minimizes the lower confidence bound.
pub fn lcb_utility(mean: f64, variance: f64, t: usize, dim: usize, nu: f64, delta: f64) -> f64 {
    lcb_kappa(t, dim, nu, delta) * sqrt(variance.max(0.0)) - mean
}

/// `(dPI/dmean, dPI/dsigma)` for `sigma > 0`.
pub fn pi_gradient(mean: f64, sigma: f64, mu_minus: f64, xi: f64) -> (f64, f64) {
    if !(sigma > 0.0) {
        return (0.0, 0.0);
    }
    let tau = mu_minus - xi - mean;
    let z = tau / sigma;
    let pdf = norm_pdf(z);
    (-pdf / sigma, -pdf * z / sigma)
}

/// `(dEI/dmean, dEI/dsigma) = (-Phi(z), phi(z))` for `sigma > 0`.
pub fn ei_gradient(mean: f64, sigma: f64, mu_minus: f64, xi: f64) -> (f64, f64) {
    if !(sigma > 0.0) {
        return (0.0, 0.0);
    }
    let z = (mu_minus - xi - mean) / sigma;
    (-norm_cdf(z), norm_pdf(z))
}

/// Budget of the multi-start inner maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSearch {
    /// Quasi-random probes per input dimension.
    pub probes_per_dim: usize,
    /// Best probes that seed a local gradient refinement.
    pub refine_starts: usize,
    /// Utility evaluations allowed per refinement.
    pub refine_budget: usize,
}

impl Default for InnerSearch {
    fn default() -> Self {
        Self {
            probes_per_dim: 512,
            refine_starts: 5,
            refine_budget: 60,
        }
    }
}

/// An acquisition's proposal, in the coordinates of the model's space.
#[derive(Debug, Clone, PartialEq)]
pub struct Nominee {
    pub point: Vec<f64>,
    pub utility: f64,
}

/// Maximizes one acquisition over the model's search space.
pub fn nominate<R: Rng + ?Sized>(
    model: &GpModel,
    spec: &AcquisitionSpec,
    t: usize,
    incumbent: &Incumbent,
    search: &InnerSearch,
    rng: &mut R,
) -> Result<Nominee> {
    let mut out = nominate_all(model, core::slice::from_ref(spec), t, incumbent, search, rng)?;
    Ok(out.remove(0))
}

/// Maximizes every acquisition in `specs`. The quasi-random probe set and its
/// posterior are shared; each acquisition then refines its own best probes.
pub fn nominate_all<R: Rng + ?Sized>(
    model: &GpModel,
    specs: &[AcquisitionSpec],
    t: usize,
    incumbent: &Incumbent,
    search: &InnerSearch,
    rng: &mut R,
) -> Result<Vec<Nominee>> {
    contract!(t >= 1, "iteration index starts at 1");
    contract!(
        search.probes_per_dim >= 1,
        "inner search needs at least one probe"
    );
    for s in specs {
        s.validated()?;
    }
    let space = model.space();
    let dim = space.dim();
    let ctx = UtilityContext {
        mu_minus: incumbent.best_posterior_mean,
        t,
        dim,
    };
    let count = search.probes_per_dim * dim;
    let probes = shifted_kronecker(count, dim, rng);
    let mut scratch = Vec::new();
    let posterior: Vec<(f64, f64)> = probes
        .chunks_exact(dim)
        .map(|u| model.predict_unit_in(u, &mut scratch))
        .collect();

    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let utilities: Vec<f64> = posterior
            .iter()
            .map(|&(m, v)| spec.utility(m, v, &ctx))
            .collect();
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| utilities[b].total_cmp(&utilities[a]).then(a.cmp(&b)));

        let mut best_u = probes[order[0] * dim..(order[0] + 1) * dim].to_vec();
        let mut best_val = utilities[order[0]];
        for &start in order.iter().take(search.refine_starts) {
            let u0 = &probes[start * dim..(start + 1) * dim];
            let (u, val) = refine(
                model,
                spec,
                &ctx,
                u0,
                utilities[start],
                search.refine_budget,
                &mut scratch,
            );
            if val > best_val {
                best_val = val;
                best_u = u;
            }
        }
        debug_assert!(utilities.iter().all(|&v| v <= best_val || v.is_nan()));
        out.push(Nominee {
            point: space.from_unit(&best_u),
            utility: best_val,
        });
    }
    Ok(out)
}

/// Projected gradient ascent in the unit cube; only improving moves are kept.
fn refine(
    model: &GpModel,
    spec: &AcquisitionSpec,
    ctx: &UtilityContext,
    start: &[f64],
    start_val: f64,
    budget: usize,
    scratch: &mut Vec<f64>,
) -> (Vec<f64>, f64) {
    let mut u = start.to_vec();
    let mut val = start_val;
    let mut step = 0.05;
    let mut used = 0;
    let mut grad = utility_grad_unit(model, spec, ctx, &u);
    while used < budget {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if !(gmax > 0.0) || step < 1e-9 {
            break;
        }
        let cand: Vec<f64> = u
            .iter()
            .zip(&grad)
            .map(|(x, g)| (x + step * g / gmax).clamp(0.0, 1.0))
            .collect();
        used += 1;
        let (m, v) = model.predict_unit_in(&cand, scratch);
        let cand_val = spec.utility(m, v, ctx);
        if cand_val > val {
            u = cand;
            val = cand_val;
            step = (step * 2.0).min(0.5);
            grad = utility_grad_unit(model, spec, ctx, &u);
        } else {
            step *= 0.5;
        }
    }
    (u, val)
}

fn utility_grad_unit(
    model: &GpModel,
    spec: &AcquisitionSpec,
    ctx: &UtilityContext,
    u: &[f64],
) -> Vec<f64> {
    let p = model.predict_unit_grad(u);
    let sigma = sqrt(p.variance);
    let (dm, ds) = spec.utility_gradient(p.mean, sigma, ctx);
    let dsigma_scale = if sigma > 0.0 { ds / (2.0 * sigma) } else { 0.0 };
    let mut g = vec![0.0; u.len()];
    for c in 0..u.len() {
        g[c] = dm * p.d_mean[c] + dsigma_scale * p.d_variance[c];
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{Dataset, GpHyperparams};
    use crate::space::SearchSpace;
    use rand::rngs::SmallRng;
    use rand::SeedableRng;

    #[test]
    fn pi_reference_values() {
        assert!((pi_utility(0.9, 1.0, 1.0, 0.1) - 0.5).abs() < 1e-15);
        let mu_minus = 1.0;
        let xi = 0.01;
        let v = pi_utility(mu_minus - xi - 1.96, 1.0, mu_minus, xi);
        assert!((v - 0.975_002_104_851_780).abs() < 1e-9);
        assert_eq!(pi_utility(2.0, 0.0, 1.0, 0.0), 0.0);
        assert_eq!(pi_utility(0.0, 0.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn ei_reference_values() {
        assert_eq!(ei_utility(-5.0, 0.0, 1.0, 0.0), 0.0);
        let v = ei_utility(1.0, 1.0, 1.0, 0.0);
        assert!((v - 0.398_942_280_401_432_7).abs() < 1e-12);
        let v = ei_utility(-3.0, 1e-18, 0.0, 0.0);
        assert!((v - 3.0).abs() < 1e-9);
    }

    #[test]
    fn beta_reference_values() {
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let b = beta_t(1, 6, 0.1);
        assert!((b - 2.0 * libm::log(pi2 / 0.3)).abs() < 1e-12);
        // 6.98687 to five decimals
        assert!((b - 6.98687).abs() < 1e-5);
        assert!(beta_t(1, 4, pi2 / 3.0).abs() < 1e-14);
        for dim in [1, 2, 6] {
            for t in 1..100 {
                assert!(beta_t(t + 1, dim, 0.3) > beta_t(t, dim, 0.3));
            }
        }
    }

    #[test]
    fn lcb_reference_values() {
        assert_eq!(lcb_utility(0.7, 0.0, 3, 2, 0.2, 0.1), -0.7);
        let v = lcb_utility(0.0, 1.0, 1, 6, 0.2, 0.1);
        assert!((v - libm::sqrt(0.2 * beta_t(1, 6, 0.1))).abs() < 1e-12);
        assert!((v - 1.1821).abs() < 1e-4);
        assert!(lcb_utility(0.5, 2.0, 4, 2, 0.2, 0.1) > lcb_utility(0.5, 1.0, 4, 2, 0.2, 0.1));
    }

    #[test]
    fn spec_validation() {
        assert!(AcquisitionSpec::pi(-0.1).is_err());
        assert!(AcquisitionSpec::lcb(0.0, 0.1).is_err());
        assert!(AcquisitionSpec::lcb(0.2, 1.0).is_err());
        assert!(AcquisitionSpec::ei(0.0).is_ok());
        assert_eq!(AcquisitionSpec::lcb(0.2, 0.1).unwrap().label(), "lcb(nu=0.2;delta=0.1)");
    }

    #[test]
    fn gradients_match_differences() {
        let h = 1e-6;
        for &(mean, sigma) in &[(0.3, 0.8), (-1.0, 0.2), (2.0, 1.5), (0.0, 0.05)] {
            let (mu_minus, xi) = (0.1, 0.01);
            for (f, g) in [
                (pi_utility as fn(f64, f64, f64, f64) -> f64, pi_gradient as fn(f64, f64, f64, f64) -> (f64, f64)),
                (ei_utility, ei_gradient),
            ] {
                let (dm, ds) = g(mean, sigma, mu_minus, xi);
                let fd_m = (f(mean + h, sigma * sigma, mu_minus, xi) - f(mean - h, sigma * sigma, mu_minus, xi)) / (2.0 * h);
                let fd_s = (f(mean, (sigma + h) * (sigma + h), mu_minus, xi)
                    - f(mean, (sigma - h) * (sigma - h), mu_minus, xi))
                    / (2.0 * h);
                assert!((dm - fd_m).abs() <= 1e-5 * fd_m.abs().max(1e-3), "{dm} {fd_m}");
                assert!((ds - fd_s).abs() <= 1e-5 * fd_s.abs().max(1e-3), "{ds} {fd_s}");
            }
        }
    }

    fn quadratic_model() -> GpModel {
        let space = SearchSpace::new(alloc::vec![-2.0], alloc::vec![3.0]).unwrap();
        let xs = [-1.7, -0.9, 0.2, 1.1, 2.6];
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| alloc::vec![*x]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x - 0.4) * (x - 0.4)).collect();
        let data = Dataset::from_rows(&rows, &ys).unwrap();
        GpModel::with_hyperparams(&space, &data, GpHyperparams::new(&[0.4], 1.0, 1e-6).unwrap()).unwrap()
    }

    #[test]
    fn nominee_matches_dense_grid() {
        let model = quadratic_model();
        let inc = Incumbent::from_model(&model).unwrap();
        let mut rng = SmallRng::seed_from_u64(1);
        for spec in [
            AcquisitionSpec::lcb(0.2, 0.1).unwrap(),
            AcquisitionSpec::ei(0.01).unwrap(),
            AcquisitionSpec::pi(0.01).unwrap(),
        ] {
            let ctx = UtilityContext { mu_minus: inc.best_posterior_mean, t: 3, dim: 1 };
            let grid_max = (0..10_000)
                .map(|i| {
                    let x = -2.0 + 5.0 * i as f64 / 9_999.0;
                    let (m, v) = model.predict(&[x]).unwrap();
                    spec.utility(m, v, &ctx)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let nom = nominate(&model, &spec, 3, &inc, &InnerSearch::default(), &mut rng).unwrap();
            let (m, v) = model.predict(&nom.point).unwrap();
            assert!((spec.utility(m, v, &ctx) - nom.utility).abs() < 1e-12);
            assert!(nom.utility >= grid_max - 1e-3, "{} vs grid {grid_max}", nom.utility);
        }
    }

    #[test]
    fn nominee_stays_in_bounds() {
        let model = quadratic_model();
        let inc = Incumbent::from_model(&model).unwrap();
        let spec = AcquisitionSpec::lcb(1.0, 0.1).unwrap();
        let search = InnerSearch { probes_per_dim: 16, refine_starts: 2, refine_budget: 10 };
        for seed in 0..1000 {
            let mut rng = SmallRng::seed_from_u64(seed);
            let nom = nominate(&model, &spec, 1 + (seed as usize % 50), &inc, &search, &mut rng).unwrap();
            assert!(model.space().contains(&nom.point));
        }
    }

    #[test]
    fn flat_landscape_still_nominates() {
        let space = SearchSpace::unit(2).unwrap();
        let rows = alloc::vec![alloc::vec![0.1, 0.1], alloc::vec![0.9, 0.9]];
        let data = Dataset::from_rows(&rows, &[1.0, 1.0]).unwrap();
        // huge lengthscale and no noise: the posterior is almost certain everywhere
        let model = GpModel::with_hyperparams(&space, &data, GpHyperparams::new(&[1e3, 1e3], 1e-9, 1e-9).unwrap()).unwrap();
        let inc = Incumbent::from_model(&model).unwrap();
        let mut rng = SmallRng::seed_from_u64(0);
        let nom = nominate(&model, &AcquisitionSpec::ei(0.5).unwrap(), 1, &inc, &InnerSearch::default(), &mut rng).unwrap();
        assert!(space.contains(&nom.point));
        assert!(nom.utility >= 0.0);
    }

    #[test]
    fn incumbent_uses_posterior_means() {
        let model = quadratic_model();
        let inc = Incumbent::from_model(&model).unwrap();
        assert_eq!(inc.best_point, alloc::vec![0.2]);
        assert!((inc.best_observed - 0.04).abs() < 1e-12);
        let direct = model
            .data()
            .inputs()
            .map(|x| model.predict(x).unwrap().0)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(inc.best_posterior_mean, direct);
    }
}
