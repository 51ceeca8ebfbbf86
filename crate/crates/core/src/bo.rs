//! The sequential optimization loop.
//!
//! [`Optimizer`] is an ask/tell state machine: it hands out the Latin
//! hypercube design first, then one portfolio nominee per iteration. Every
//! `tell` after the design refits the GP and, for portfolio steps, feeds the
//! refitted posterior means at all nominees back into the rewards.
//! [`run_bo`] drives it against a closure.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{Incumbent, InnerSearch};
use crate::design::latin_hypercube;
use crate::error::{contract, Error, Result};
use crate::gp::{Dataset, FitOptions, GpModel};
use crate::portfolio::{PortfolioState, SelectionTrace, Step};
use crate::space::SearchSpace;

/// Latin hypercube points evaluated before the first portfolio step.
pub const DEFAULT_INITIAL_POINTS: usize = 5;

const STREAM_DESIGN: u64 = 0;
const STREAM_FIT: u64 = 1;
const STREAM_STEP: u64 = 2;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub space: SearchSpace,
    /// Portfolio steps after the initial design.
    pub iterations: usize,
    pub initial_points: usize,
    /// Portfolio in its initial state (all rewards zero).
    pub portfolio: PortfolioState,
    pub seed: u64,
    pub fit: FitOptions,
    pub search: InnerSearch,
    /// Start the first evidence ascent of each refit from the previous
    /// hyperparameters instead of the fixed heuristic.
    pub warm_start: bool,
}

impl RunConfig {
    pub fn new(space: SearchSpace, portfolio: PortfolioState, iterations: usize, seed: u64) -> Self {
        Self {
            space,
            iterations,
            initial_points: DEFAULT_INITIAL_POINTS,
            portfolio,
            seed,
            fit: FitOptions::default(),
            search: InnerSearch::default(),
            warm_start: true,
        }
    }

    fn validate(&self) -> Result<()> {
        contract!(self.iterations >= 1, "need at least one iteration");
        contract!(
            self.initial_points >= 2,
            "need at least 2 initial points to fit the GP, got {}",
            self.initial_points
        );
        Ok(())
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// 0 for initial-design points, then 1..=T.
    pub iteration: usize,
    pub x: Vec<f64>,
    pub y: f64,
    pub best_so_far: f64,
    /// Present for portfolio steps only.
    pub selection: Option<SelectionTrace>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub evaluations: Vec<Evaluation>,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }

    /// Best evaluated point and its value.
    pub fn incumbent(&self) -> Option<(&[f64], f64)> {
        self.evaluations
            .iter()
            .fold(None, |best: Option<&Evaluation>, e| match best {
                Some(b) if b.y <= e.y => Some(b),
                _ => Some(e),
            })
            .map(|e| (e.x.as_slice(), e.y))
    }

    /// Best-so-far after the initial design, then after each portfolio step.
    pub fn best_by_iteration(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, e) in self.evaluations.iter().enumerate() {
            let last_of_design = e.iteration == 0
                && self
                    .evaluations
                    .get(i + 1)
                    .map_or(true, |next| next.iteration != 0);
            if e.iteration > 0 || last_of_design {
                out.push(e.best_so_far);
            }
        }
        out
    }

    pub fn traces(&self) -> impl Iterator<Item = &SelectionTrace> + '_ {
        self.evaluations.iter().filter_map(|e| e.selection.as_ref())
    }
}

/// `best_so_far - f_min` per iteration (see [`RunRecord::best_by_iteration`]),
/// clamped at 0 because stored minima are rounded.
pub fn simple_error(record: &RunRecord, f_min: Option<f64>) -> Result<Vec<f64>> {
    let f_min = f_min.ok_or(Error::UnknownMinimum)?;
    Ok(record
        .best_by_iteration()
        .into_iter()
        .map(|b| (b - f_min).max(0.0))
        .collect())
}

#[derive(Debug, Clone)]
enum Pending {
    None,
    Design(usize),
    Step(Step),
}

/// Ask/tell driver for one optimization run.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: RunConfig,
    design: Vec<Vec<f64>>,
    told_design: usize,
    data: Dataset,
    portfolio: PortfolioState,
    model: Option<GpModel>,
    fit_rng: ChaCha8Rng,
    step_rng: ChaCha8Rng,
    pending: Pending,
    iteration: usize,
    record: RunRecord,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl Optimizer {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let design = latin_hypercube(
            config.initial_points,
            &config.space,
            &mut stream(config.seed, STREAM_DESIGN),
        )?;
        Ok(Self {
            data: Dataset::new(config.space.dim()),
            portfolio: config.portfolio.clone(),
            fit_rng: stream(config.seed, STREAM_FIT),
            step_rng: stream(config.seed, STREAM_STEP),
            design,
            told_design: 0,
            model: None,
            pending: Pending::None,
            iteration: 0,
            record: RunRecord::default(),
            config,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn portfolio(&self) -> &PortfolioState {
        &self.portfolio
    }

    /// The current surrogate, available once the design has been evaluated.
    pub fn model(&self) -> Option<&GpModel> {
        self.model.as_ref()
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn into_record(self) -> RunRecord {
        self.record
    }

    /// Portfolio steps completed so far.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// `true` once the configured number of iterations has been told.
    pub fn is_done(&self) -> bool {
        self.iteration >= self.config.iterations
    }

    /// The next point to evaluate. Asking again before `tell` returns the
    /// same point.
    pub fn ask(&mut self) -> Result<Vec<f64>> {
        match &self.pending {
            Pending::Design(i) => return Ok(self.design[*i].clone()),
            Pending::Step(s) => return Ok(s.point.clone()),
            Pending::None => {}
        }
        if self.told_design < self.design.len() {
            self.pending = Pending::Design(self.told_design);
            return Ok(self.design[self.told_design].clone());
        }
        let model = self
            .model
            .as_ref()
            .ok_or_else(|| Error::Contract("no surrogate model available".into()))?;
        let incumbent = Incumbent::from_model(model)?;
        let step = self.portfolio.step(
            model,
            self.iteration + 1,
            &incumbent,
            &self.config.search,
            &mut self.step_rng,
        )?;
        let point = step.point.clone();
        self.pending = Pending::Step(step);
        Ok(point)
    }

    /// Reports the objective value at the point returned by the last `ask`.
    pub fn tell(&mut self, y: f64) -> Result<()> {
        let pending = core::mem::replace(&mut self.pending, Pending::None);
        let (x, selection, iteration) = match pending {
            Pending::None => {
                return Err(Error::Contract("tell without a pending ask".into()));
            }
            Pending::Design(i) => (self.design[i].clone(), None, 0),
            Pending::Step(step) => (step.point, Some(step.trace), self.iteration + 1),
        };
        if let Err(e) = self.data.push(&x, y) {
            self.pending = match selection {
                None => Pending::Design(self.told_design),
                Some(trace) => Pending::Step(Step { point: x, trace }),
            };
            return Err(e);
        }
        let best_so_far = self
            .record
            .evaluations
            .last()
            .map_or(y, |e| e.best_so_far.min(y));
        if iteration == 0 {
            self.told_design += 1;
        } else {
            self.iteration = iteration;
        }

        let design_done = self.told_design >= self.design.len();
        if design_done {
            self.refit()?;
        }
        if let (Some(trace), Some(model)) = (&selection, &self.model) {
            let mut means = Vec::with_capacity(trace.nominees.len());
            for x in &trace.nominees {
                means.push(model.predict(x)?.0);
            }
            self.portfolio.update_rewards(&means)?;
        }
        self.record.evaluations.push(Evaluation {
            iteration,
            x,
            y,
            best_so_far,
            selection,
        });
        Ok(())
    }

    fn refit(&mut self) -> Result<()> {
        let warm = if self.config.warm_start {
            self.model.as_ref().map(|m| m.hyperparams().clone())
        } else {
            None
        };
        let model = GpModel::fit_from(
            &self.config.space,
            &self.data,
            &self.config.fit,
            warm.as_ref(),
            &mut self.fit_rng,
        )?;
        self.model = Some(model);
        Ok(())
    }
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError<E> {
    #[error("objective evaluation failed: {0}")]
    Objective(E),
    #[error(transparent)]
    Optimizer(Error),
}

/// A failed run with everything evaluated before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure<E> {
    pub error: RunError<E>,
    pub partial: RunRecord,
}

/// Runs the initial design and `config.iterations` portfolio steps.
pub fn run_bo<E, F>(config: RunConfig, mut objective: F) -> Result<RunRecord, RunFailure<E>>
where
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    let mut opt = match Optimizer::new(config) {
        Ok(o) => o,
        Err(e) => {
            return Err(RunFailure {
                error: RunError::Optimizer(e),
                partial: RunRecord::default(),
            })
        }
    };
    macro_rules! bail {
        ($err:expr) => {
            return Err(RunFailure {
                error: $err,
                partial: opt.into_record(),
            })
        };
    }
    while !opt.is_done() {
        let x = match opt.ask() {
            Ok(x) => x,
            Err(e) => bail!(RunError::Optimizer(e)),
        };
        let y = match objective(&x) {
            Ok(y) => y,
            Err(e) => bail!(RunError::Objective(e)),
        };
        if let Err(e) = opt.tell(y) {
            bail!(RunError::Optimizer(e));
        }
    }
    Ok(opt.into_record())
}
