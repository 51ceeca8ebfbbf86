//! Latin hypercube designs.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{contract, Result};
use crate::space::SearchSpace;

/// `n` points such that, along every axis, each of the `n` equal-width
/// strata of the box holds exactly one point. Positions inside a stratum are
/// uniform.
pub fn latin_hypercube<R: Rng + ?Sized>(
    n: usize,
    space: &SearchSpace,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    contract!(n >= 1, "latin hypercube needs n >= 1");
    let dim = space.dim();
    let mut points = alloc::vec![alloc::vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        strata.shuffle(rng);
        let (lo, hi) = (space.lower()[d], space.upper()[d]);
        for (point, &k) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.gen();
            point[d] = (lo + (hi - lo) * ((k as f64 + u) / n as f64)).clamp(lo, hi);
        }
    }
    Ok(points)
}
