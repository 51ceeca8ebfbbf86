use alloc::vec::Vec;

use crate::error::{contract, Result};

/// Axis-aligned box `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        contract!(!lower.is_empty(), "search space needs at least one dimension");
        contract!(
            lower.len() == upper.len(),
            "bounds have different lengths ({} vs {})",
            lower.len(),
            upper.len()
        );
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            contract!(
                lo.is_finite() && hi.is_finite() && lo < hi,
                "dimension {d}: need finite lower < upper, got [{lo}, {hi}]"
            );
        }
        Ok(Self { lower, upper })
    }

    /// The unit hypercube `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(alloc::vec![0.0; dim], alloc::vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Maps a point of the box onto the unit hypercube.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect()
    }

    /// Inverse of [`to_unit`](Self::to_unit); the result is clamped so rounding
    /// can never leave the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (lo + v * (hi - lo)).clamp(*lo, *hi))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_inverted_bounds() {
        assert!(SearchSpace::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(SearchSpace::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(SearchSpace::new(vec![], vec![]).is_err());
    }

    #[test]
    fn unit_mapping_stays_in_bounds() {
        let s = SearchSpace::new(vec![-5.0, 0.0], vec![10.0, 15.0]).unwrap();
        let x = s.from_unit(&[1.0, 1.0]);
        assert_eq!(x, vec![10.0, 15.0]);
        assert!(s.contains(&s.from_unit(&[0.3, 0.7])));
        let u = s.to_unit(&[2.5, 7.5]);
        assert_eq!(u, vec![0.5, 0.5]);
    }
}
