use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller broke an API precondition (shapes, bounds, parameter ranges).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A point handed to a benchmark lies outside its domain.
    #[error("point outside the domain of {benchmark}: coordinate {index} = {value}")]
    OutOfDomain {
        benchmark: &'static str,
        index: usize,
        value: f64,
    },
    /// The covariance matrix could not be factorized even with maximal jitter.
    #[error("covariance factorization failed: {0}")]
    Numerical(String),
    /// Simple error needs a known minimum; external objectives have none.
    #[error("objective has no known minimum; report raw best-so-far values instead")]
    UnknownMinimum,
}

macro_rules! contract {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::Error::Contract(alloc::format!($($arg)+)));
        }
    };
}
pub(crate) use contract;
