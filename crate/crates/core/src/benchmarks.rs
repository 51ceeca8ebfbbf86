//! Synthetic objectives with known minima.
//!
//! Constants follow the standard virtual-library definitions of each
//! function. Stored minima carry six significant figures.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{cos, exp};
use crate::space::SearchSpace;

/// A named test function on a box, with its global minimum.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub space: SearchSpace,
    pub evaluator: fn(&[f64]) -> Result<f64>,
    pub f_min: f64,
    pub minimizers: Vec<Vec<f64>>,
}

impl Benchmark {
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        (self.evaluator)(x)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Checks every listed minimizer against `f_min` within `tol`.
    pub fn self_test(&self, tol: f64) -> Result<()> {
        for m in &self.minimizers {
            let v = self.evaluate(m)?;
            if (v - self.f_min).abs() > tol {
                return Err(Error::Numerical(alloc::format!(
                    "{}: f({m:?}) = {v}, expected {} within {tol}",
                    self.name,
                    self.f_min
                )));
            }
        }
        Ok(())
    }
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 3] = ["branin", "hartmann3", "hartmann6"];

pub fn by_name(name: &str) -> Option<Benchmark> {
    match name {
        "branin" => Some(branin_benchmark()),
        "hartmann3" => Some(hartmann3_benchmark()),
        "hartmann6" => Some(hartmann6_benchmark()),
        _ => None,
    }
}

/// Every registered benchmark, self-tested at `1e-4`.
pub fn registry() -> Result<Vec<Benchmark>> {
    let all: Vec<Benchmark> = NAMES.iter().filter_map(|n| by_name(n)).collect();
    for b in &all {
        b.self_test(1e-4)?;
    }
    Ok(all)
}

fn check_domain(name: &'static str, x: &[f64], lower: &[f64], upper: &[f64]) -> Result<()> {
    if x.len() != lower.len() {
        return Err(Error::Contract(alloc::format!(
            "{name} takes {} coordinates, got {}",
            lower.len(),
            x.len()
        )));
    }
    for (index, ((&value, lo), hi)) in x.iter().zip(lower).zip(upper).enumerate() {
        if !(value >= *lo && value <= *hi) {
            return Err(Error::OutOfDomain {
                benchmark: name,
                index,
                value,
            });
        }
    }
    Ok(())
}

const BRANIN_LOWER: [f64; 2] = [-5.0, 0.0];
const BRANIN_UPPER: [f64; 2] = [10.0, 15.0];

/// Branin on `[-5, 10] x [0, 15]`.
pub fn branin(x: &[f64]) -> Result<f64> {
    check_domain("branin", x, &BRANIN_LOWER, &BRANIN_UPPER)?;
    let a = 1.0;
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let r = 6.0;
    let s = 10.0;
    let t = 1.0 / (8.0 * PI);
    let (x1, x2) = (x[0], x[1]);
    let q = x2 - b * x1 * x1 + c * x1 - r;
    Ok(a * q * q + s * (1.0 - t) * cos(x1) + s)
}

pub fn branin_benchmark() -> Benchmark {
    Benchmark {
        name: "branin",
        space: SearchSpace::new(BRANIN_LOWER.to_vec(), BRANIN_UPPER.to_vec()).unwrap(),
        evaluator: branin,
        f_min: 0.397887,
        minimizers: vec![vec![-PI, 12.275], vec![PI, 2.275], vec![9.42478, 2.475]],
    }
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

const HARTMANN3_A: [[f64; 3]; 4] = [
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
];

const HARTMANN3_P: [[f64; 3]; 4] = [
    [3689.0, 1170.0, 2673.0],
    [4699.0, 4387.0, 7470.0],
    [1091.0, 8732.0, 5547.0],
    [381.0, 5743.0, 8828.0],
];

const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];

const HARTMANN6_P: [[f64; 6]; 4] = [
    [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
    [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
    [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
    [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
];

fn hartmann<const D: usize>(x: &[f64], a: &[[f64; D]; 4], p: &[[f64; D]; 4]) -> f64 {
    let mut total = 0.0;
    for i in 0..4 {
        let mut inner = 0.0;
        for j in 0..D {
            let d = x[j] - 1e-4 * p[i][j];
            inner += a[i][j] * d * d;
        }
        total += HARTMANN_ALPHA[i] * exp(-inner);
    }
    -total
}

/// Hartmann 3 on `[0, 1]^3`.
pub fn hartmann3(x: &[f64]) -> Result<f64> {
    check_domain("hartmann3", x, &[0.0; 3], &[1.0; 3])?;
    Ok(hartmann(x, &HARTMANN3_A, &HARTMANN3_P))
}

pub fn hartmann3_benchmark() -> Benchmark {
    Benchmark {
        name: "hartmann3",
        space: SearchSpace::unit(3).unwrap(),
        evaluator: hartmann3,
        f_min: -3.86278,
        minimizers: vec![vec![0.114614, 0.555649, 0.852547]],
    }
}

/// Hartmann 6 on `[0, 1]^6`.
pub fn hartmann6(x: &[f64]) -> Result<f64> {
    check_domain("hartmann6", x, &[0.0; 6], &[1.0; 6])?;
    Ok(hartmann(x, &HARTMANN6_A, &HARTMANN6_P))
}

pub fn hartmann6_benchmark() -> Benchmark {
    Benchmark {
        name: "hartmann6",
        space: SearchSpace::unit(6).unwrap(),
        evaluator: hartmann6,
        f_min: -3.32237,
        minimizers: vec![vec![0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn branin_minimizers() {
        let v = branin(&[PI, 2.275]).unwrap();
        assert!((v - 0.397887).abs() < 1e-5);
        let w = branin(&[-PI, 12.275]).unwrap();
        assert!((v - w).abs() < 1e-6);
    }

    #[test]
    fn branin_lower_bound_sweep() {
        let mut rng = SmallRng::seed_from_u64(0);
        for _ in 0..1000 {
            let x = [rng.gen_range(-5.0..=10.0), rng.gen_range(0.0..=15.0)];
            assert!(branin(&x).unwrap() >= 0.397887 - 1e-9);
        }
    }

    #[test]
    fn hartmann3_minimizer_and_domain() {
        let v = hartmann3(&[0.114614, 0.555649, 0.852547]).unwrap();
        assert!((v + 3.86278).abs() < 1e-4);
        assert!(matches!(
            hartmann3(&[0.5, 1.5, 0.5]),
            Err(Error::OutOfDomain { index: 1, .. })
        ));
        assert!(matches!(hartmann3(&[0.5, 0.5]), Err(Error::Contract(_))));
        assert!(hartmann3(&[f64::NAN, 0.5, 0.5]).is_err());
    }

    #[test]
    fn hartmann6_minimizer_is_not_symmetric() {
        let m = [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573];
        let v = hartmann6(&m).unwrap();
        assert!((v + 3.32237).abs() < 1e-4);
        let mut rev = m;
        rev.reverse();
        assert!(hartmann6(&rev).unwrap() > v);
        let mut swapped = m;
        swapped.swap(0, 5);
        assert!(hartmann6(&swapped).unwrap() > v);
    }

    #[test]
    fn branin_rejects_outside() {
        assert!(branin(&[10.5, 3.0]).is_err());
        assert!(branin(&[0.0, -0.1]).is_err());
    }

    #[test]
    fn registry_self_tests() {
        let all = registry().unwrap();
        assert_eq!(all.len(), 3);
        assert!(by_name("rosenbrock").is_none());
        for b in &all {
            assert_eq!(b.evaluate(&b.minimizers[0]).unwrap(), b.evaluate(&b.minimizers[0]).unwrap());
        }
    }
}
