//! Experiment configuration and its expansion into cells.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use portfolio_bo::acquisition::AcquisitionSpec;
use portfolio_bo::portfolio::{PortfolioState, Strategy, DEFAULT_MEMORY, GP_HEDGE_ETA, NO_PAST_BO_ETA};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    GpHedge,
    NoPastBo,
    Random,
    Pi,
    Ei,
    Lcb,
}

impl StrategyName {
    pub const ALL: [StrategyName; 6] = [
        Self::GpHedge,
        Self::NoPastBo,
        Self::Random,
        Self::Pi,
        Self::Ei,
        Self::Lcb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::GpHedge => "gp-hedge",
            Self::NoPastBo => "no-past-bo",
            Self::Random => "random",
            Self::Pi => "pi",
            Self::Ei => "ei",
            Self::Lcb => "lcb",
        }
    }

    /// Whether the strategy draws from the whole portfolio.
    pub fn is_portfolio(self) -> bool {
        matches!(self, Self::GpHedge | Self::NoPastBo | Self::Random)
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                HarnessError::Config(format!(
                    "unknown strategy {s:?}; expected one of gp-hedge, no-past-bo, random, pi, ei, lcb"
                ))
            })
    }
}

/// PI and EI at `xi = 0.01`, LCB at `nu = 0.2, delta = 0.1`.
pub fn base_specs() -> Vec<AcquisitionSpec> {
    vec![
        AcquisitionSpec::Pi { xi: 0.01 },
        AcquisitionSpec::Ei { xi: 0.01 },
        AcquisitionSpec::Lcb { nu: 0.2, delta: 0.1 },
    ]
}

/// The acquisition set for a portfolio of size 3 or 9.
pub fn portfolio_specs(size: usize) -> Result<Vec<AcquisitionSpec>> {
    match size {
        3 => Ok(base_specs()),
        9 => {
            let xis = [0.01, 0.1, 1.0];
            let nus = [0.2, 0.1, 1.0];
            let mut specs: Vec<AcquisitionSpec> =
                xis.iter().map(|&xi| AcquisitionSpec::Pi { xi }).collect();
            specs.extend(xis.iter().map(|&xi| AcquisitionSpec::Ei { xi }));
            specs.extend(nus.iter().map(|&nu| AcquisitionSpec::Lcb { nu, delta: 0.1 }));
            Ok(specs)
        }
        other => Err(HarnessError::Config(format!(
            "portfolio size must be 3 or 9, got {other}"
        ))),
    }
}

/// Everything `run` needs. Mirrors the CLI flags; loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: String,
    pub strategies: Vec<StrategyName>,
    pub portfolio: usize,
    /// Memory factors for No-PASt-BO; one cell each.
    pub memory: Vec<f64>,
    /// Softmax temperatures for the hedging strategies. Empty means each
    /// strategy's default (1 for GP-Hedge, 4 for No-PASt-BO).
    pub eta: Vec<f64>,
    pub runs: usize,
    pub iters: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Parallel runs; 0 uses every available core.
    pub workers: usize,
    /// Also render `convergence.svg`.
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            benchmark: "branin".into(),
            strategies: vec![StrategyName::GpHedge, StrategyName::NoPastBo, StrategyName::Random],
            portfolio: 3,
            memory: vec![DEFAULT_MEMORY],
            eta: Vec::new(),
            runs: 25,
            iters: 100,
            seed: 0,
            out: PathBuf::from("results"),
            workers: 0,
            svg: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if portfolio_bo::benchmarks::by_name(&self.benchmark).is_none() {
            return bad(format!(
                "unknown benchmark {:?}; expected one of {}",
                self.benchmark,
                portfolio_bo::benchmarks::NAMES.join(", ")
            ));
        }
        portfolio_specs(self.portfolio)?;
        if self.strategies.is_empty() {
            return bad("no strategies selected".into());
        }
        if self.runs == 0 || self.iters == 0 {
            return bad(format!("runs and iters must be positive (got {} and {})", self.runs, self.iters));
        }
        if self.strategies.contains(&StrategyName::NoPastBo) && self.memory.is_empty() {
            return bad("no-past-bo needs at least one memory factor".into());
        }
        if let Some(m) = self.memory.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return bad(format!("memory factor {m} outside [0, 1]"));
        }
        if let Some(e) = self.eta.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return bad(format!("eta must be positive, got {e}"));
        }
        Ok(())
    }

    /// One cell per (strategy, memory, eta) combination, in config order.
    pub fn cells(&self) -> Result<Vec<CellSpec>> {
        self.validate()?;
        let portfolio = portfolio_specs(self.portfolio)?;
        let etas = |default: f64| -> Vec<f64> {
            if self.eta.is_empty() {
                vec![default]
            } else {
                self.eta.clone()
            }
        };
        let mut cells = Vec::new();
        for &strategy in &self.strategies {
            match strategy {
                StrategyName::GpHedge => {
                    for eta in etas(GP_HEDGE_ETA) {
                        cells.push(CellSpec::new(strategy, None, Some(eta), portfolio.clone()));
                    }
                }
                StrategyName::NoPastBo => {
                    for &m in &self.memory {
                        for eta in etas(NO_PAST_BO_ETA) {
                            cells.push(CellSpec::new(strategy, Some(m), Some(eta), portfolio.clone()));
                        }
                    }
                }
                StrategyName::Random => {
                    cells.push(CellSpec::new(strategy, None, None, portfolio.clone()))
                }
                StrategyName::Pi => cells.push(CellSpec::new(strategy, None, None, vec![base_specs()[0]])),
                StrategyName::Ei => cells.push(CellSpec::new(strategy, None, None, vec![base_specs()[1]])),
                StrategyName::Lcb => cells.push(CellSpec::new(strategy, None, None, vec![base_specs()[2]])),
            }
        }
        let mut seen = std::collections::HashSet::new();
        for c in &cells {
            if !seen.insert(c.id.clone()) {
                return Err(HarnessError::Config(format!("cell {} listed twice", c.id)));
            }
        }
        Ok(cells)
    }
}

/// One strategy setting, run R times.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    /// Directory-safe name, e.g. `no-past-bo_m0.7_eta4`.
    pub id: String,
    pub strategy: StrategyName,
    pub memory: Option<f64>,
    pub eta: Option<f64>,
    pub specs: Vec<AcquisitionSpec>,
}

impl CellSpec {
    fn new(strategy: StrategyName, memory: Option<f64>, eta: Option<f64>, specs: Vec<AcquisitionSpec>) -> Self {
        let mut id = strategy.as_str().to_string();
        if let Some(m) = memory {
            id.push_str(&format!("_m{m}"));
        }
        if let Some(e) = eta {
            id.push_str(&format!("_eta{e}"));
        }
        Self {
            id,
            strategy,
            memory,
            eta,
            specs,
        }
    }

    /// A fresh portfolio for one run.
    pub fn portfolio(&self) -> Result<PortfolioState> {
        let specs = self.specs.clone();
        let state = match self.strategy {
            StrategyName::GpHedge => PortfolioState::gp_hedge(specs, self.eta.unwrap_or(GP_HEDGE_ETA)),
            StrategyName::NoPastBo => PortfolioState::new(
                Strategy::no_past_bo(self.memory.unwrap_or(DEFAULT_MEMORY)),
                specs,
                self.eta.unwrap_or(NO_PAST_BO_ETA),
            ),
            StrategyName::Random => PortfolioState::random(specs),
            StrategyName::Pi | StrategyName::Ei | StrategyName::Lcb => PortfolioState::single(specs[0]),
        };
        Ok(state?)
    }

    pub fn labels(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.label()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_function_portfolio() {
        let specs = portfolio_specs(9).unwrap();
        assert_eq!(specs.len(), 9);
        assert_eq!(&specs[..1], &base_specs()[..1]);
        assert!(specs.contains(&AcquisitionSpec::Lcb { nu: 1.0, delta: 0.1 }));
        assert!(specs.contains(&AcquisitionSpec::Ei { xi: 1.0 }));
        assert!(portfolio_specs(4).is_err());
    }

    #[test]
    fn memory_sweep_fans_out() {
        let config = ExperimentConfig {
            strategies: vec![StrategyName::NoPastBo, StrategyName::Ei],
            memory: vec![0.7, 1.0],
            ..Default::default()
        };
        let ids: Vec<String> = config.cells().unwrap().into_iter().map(|c| c.id).collect();
        assert_eq!(ids, ["no-past-bo_m0.7_eta4", "no-past-bo_m1_eta4", "ei"]);
    }

    #[test]
    fn toml_round_trip() {
        let config = ExperimentConfig::from_toml_str(
            r#"
            benchmark = "hartmann6"
            strategies = ["gp-hedge", "lcb"]
            portfolio = 9
            eta = [0.5, 2.0]
            runs = 3
            "#,
        )
        .unwrap();
        assert_eq!(config.benchmark, "hartmann6");
        assert_eq!(config.iters, 100);
        assert_eq!(config.cells().unwrap().len(), 3);
        let back = ExperimentConfig::from_toml_str(&toml::to_string(&config).unwrap()).unwrap();
        assert_eq!(back, config);
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig::default();
        c.benchmark = "rosenbrock".into();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.memory = vec![1.5];
        assert!(c.validate().is_err());
        assert!("ucb".parse::<StrategyName>().is_err());
        assert_eq!("no-past-bo".parse::<StrategyName>().unwrap(), StrategyName::NoPastBo);
    }
}
