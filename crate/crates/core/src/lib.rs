//! Bayesian optimization with hedged portfolios of acquisition functions.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numerical
//! piece of the optimizer:
//!
//! * [`gp`]: exact Gaussian-process regression with a Matérn 5/2 ARD kernel,
//!   evidence maximization and posterior prediction.
//! * [`acquisition`]: PI, EI and GP-LCB utilities plus the inner maximizer
//!   that turns each utility into a nominee point.
//! * [`portfolio`]: GP-Hedge, No-PASt-BO (memory factor and reward
//!   normalization) and a uniform random portfolio.
//! * [`design`]: Latin hypercube initial designs.
//! * [`bo`]: the sequential loop, exposed both as an ask/tell [`bo::Optimizer`]
//!   and as the one-shot [`bo::run_bo`].
//! * [`benchmarks`]: Branin, Hartmann 3 and Hartmann 6.
//!
//! IO, statistics across runs and the command line live in the companion
//! `portfolio-bo-harness` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod acquisition;
pub mod benchmarks;
pub mod bo;
pub mod design;
mod error;
pub mod gp;
mod linalg;
mod math;
pub mod portfolio;
mod qmc;
mod space;

pub use error::{Error, Result};
pub use space::SearchSpace;
