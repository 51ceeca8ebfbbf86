//! Allocation strategies over a portfolio of acquisition functions.
//!
//! All hedging strategies keep one cumulative reward `G_j` per acquisition
//! and pick acquisition `j` with probability proportional to
//! `exp(eta * score_j)`:
//!
//! * GP-Hedge scores with the raw rewards and updates `G_j <- G_j - mu_j`.
//! * No-PASt-BO discounts old rewards, `G_j <- m G_j - mu_j`, and scores with
//!   rewards rescaled onto `[-1, 0]`, so probabilities stay separated even
//!   when the raw rewards are close together.
//! * Random ignores rewards and picks uniformly.
//!
//! `mu_j` is the posterior mean at acquisition `j`'s own nominee, computed by
//! the model refitted after the chosen point has been evaluated.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::acquisition::{nominate_all, AcquisitionSpec, Incumbent, InnerSearch};
use crate::error::{contract, Result};
use crate::gp::GpModel;
use crate::math::exp;

/// Default `eta` for No-PASt-BO.
pub const NO_PAST_BO_ETA: f64 = 4.0;
/// Default `eta` for GP-Hedge.
pub const GP_HEDGE_ETA: f64 = 1.0;
/// Default memory factor.
pub const DEFAULT_MEMORY: f64 = 0.7;
/// Memory factors swept in the sensitivity study.
pub const MEMORY_SWEEP: [f64; 7] = [0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    GpHedge,
    /// `normalize = false` keeps the memory factor but feeds raw rewards to
    /// the softmax ("GP-Hedge with memory").
    NoPastBo { memory: f64, normalize: bool },
    Random,
}

impl Strategy {
    pub fn no_past_bo(memory: f64) -> Self {
        Self::NoPastBo {
            memory,
            normalize: true,
        }
    }

    pub fn is_hedging(&self) -> bool {
        !matches!(self, Self::Random)
    }
}

/// Rescales rewards onto `[-1, 0]`: the best maps to 0, the worst to -1.
///
/// When all rewards are equal the ratio is undefined; the result is then all
/// zeros, which any softmax turns into uniform probabilities.
pub fn normalize_rewards(rewards: &[f64]) -> Vec<f64> {
    let r_max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let r_min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
    let span = r_max - r_min;
    if !(span > 0.0) {
        return vec![0.0; rewards.len()];
    }
    rewards.iter().map(|g| (g - r_max) / span).collect()
}

/// Softmax of `eta * scores`, computed after subtracting the maximum.
pub fn selection_probabilities(scores: &[f64], eta: f64) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| exp(eta * (s - top))).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Inverse-CDF draw from a categorical distribution with a single uniform.
pub fn select_nominee<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (j, p) in probabilities.iter().enumerate() {
        cum += p;
        if u < cum {
            return j;
        }
    }
    // rounding left cum slightly below 1: fall back to the last nonzero entry
    probabilities.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// What a portfolio step decided, for logging and plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace {
    pub iteration: usize,
    pub probabilities: Vec<f64>,
    pub chosen: usize,
    pub nominees: Vec<Vec<f64>>,
    /// Raw rewards `G(t-1)` the probabilities were computed from.
    pub rewards: Vec<f64>,
    /// Normalized rewards, when the strategy normalizes.
    pub normalized_rewards: Option<Vec<f64>>,
}

/// Output of [`PortfolioState::step`]. Rewards are not touched until the
/// caller refits the model and calls [`PortfolioState::update_rewards`].
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub point: Vec<f64>,
    pub trace: SelectionTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioState {
    strategy: Strategy,
    specs: Vec<AcquisitionSpec>,
    rewards: Vec<f64>,
    eta: f64,
}

impl PortfolioState {
    pub fn new(strategy: Strategy, specs: Vec<AcquisitionSpec>, eta: f64) -> Result<Self> {
        contract!(!specs.is_empty(), "portfolio needs at least one acquisition");
        for s in &specs {
            s.validated()?;
        }
        match strategy {
            Strategy::Random => {}
            Strategy::GpHedge | Strategy::NoPastBo { .. } => {
                contract!(specs.len() >= 2, "hedging needs at least 2 acquisitions");
                contract!(eta > 0.0 && eta.is_finite(), "eta must be > 0, got {eta}");
            }
        }
        if let Strategy::NoPastBo { memory, .. } = strategy {
            contract!(
                (0.0..=1.0).contains(&memory),
                "memory factor must lie in [0, 1], got {memory}"
            );
        }
        let j = specs.len();
        Ok(Self {
            strategy,
            specs,
            rewards: vec![0.0; j],
            eta,
        })
    }

    pub fn gp_hedge(specs: Vec<AcquisitionSpec>, eta: f64) -> Result<Self> {
        Self::new(Strategy::GpHedge, specs, eta)
    }

    pub fn no_past_bo(specs: Vec<AcquisitionSpec>, eta: f64, memory: f64) -> Result<Self> {
        Self::new(Strategy::no_past_bo(memory), specs, eta)
    }

    pub fn random(specs: Vec<AcquisitionSpec>) -> Result<Self> {
        Self::new(Strategy::Random, specs, 1.0)
    }

    /// Plain BO with one acquisition.
    pub fn single(spec: AcquisitionSpec) -> Result<Self> {
        Self::random(vec![spec])
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn specs(&self) -> &[AcquisitionSpec] {
        &self.specs
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Normalized rewards if this strategy normalizes.
    pub fn normalized_rewards(&self) -> Option<Vec<f64>> {
        match self.strategy {
            Strategy::NoPastBo { normalize: true, .. } => Some(normalize_rewards(&self.rewards)),
            _ => None,
        }
    }

    /// Probabilities of choosing each acquisition at the next step.
    pub fn probabilities(&self) -> Vec<f64> {
        let j = self.specs.len();
        match self.strategy {
            Strategy::Random => vec![1.0 / j as f64; j],
            Strategy::GpHedge | Strategy::NoPastBo { normalize: false, .. } => {
                selection_probabilities(&self.rewards, self.eta)
            }
            Strategy::NoPastBo { normalize: true, .. } => {
                selection_probabilities(&normalize_rewards(&self.rewards), self.eta)
            }
        }
    }

    /// Nominates one point per acquisition and samples which one to evaluate.
    pub fn step<R: Rng + ?Sized>(
        &self,
        model: &GpModel,
        t: usize,
        incumbent: &Incumbent,
        search: &InnerSearch,
        rng: &mut R,
    ) -> Result<Step> {
        let nominees = nominate_all(model, &self.specs, t, incumbent, search, rng)?;
        let probabilities = self.probabilities();
        let chosen = if self.specs.len() == 1 {
            0
        } else {
            select_nominee(&probabilities, rng)
        };
        let nominees: Vec<Vec<f64>> = nominees.into_iter().map(|n| n.point).collect();
        Ok(Step {
            point: nominees[chosen].clone(),
            trace: SelectionTrace {
                iteration: t,
                probabilities,
                chosen,
                nominees,
                rewards: self.rewards.clone(),
                normalized_rewards: self.normalized_rewards(),
            },
        })
    }

    /// Applies one reward update from the posterior means of every nominee
    /// under the refitted model.
    pub fn update_rewards(&mut self, posterior_means: &[f64]) -> Result<()> {
        contract!(
            posterior_means.len() == self.rewards.len(),
            "{} posterior means for {} acquisitions",
            posterior_means.len(),
            self.rewards.len()
        );
        let memory = match self.strategy {
            Strategy::Random => return Ok(()),
            Strategy::GpHedge => 1.0,
            Strategy::NoPastBo { memory, .. } => memory,
        };
        for (g, mu) in self.rewards.iter_mut().zip(posterior_means) {
            *g = memory * *g - mu;
        }
        Ok(())
    }
}
