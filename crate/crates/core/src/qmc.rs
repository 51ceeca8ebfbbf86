//! Randomly shifted Kronecker (R_d) low-discrepancy points in the unit cube.

use alloc::vec::Vec;

use rand::Rng;

/// Positive root of `x^(d+1) = x + 1`.
fn generalized_golden_ratio(dim: usize) -> f64 {
    let p = (dim + 1) as i32;
    let mut x = 2.0f64;
    for _ in 0..64 {
        let f = libm::pow(x, p as f64) - x - 1.0;
        let df = p as f64 * libm::pow(x, (p - 1) as f64) - 1.0;
        let next = x - f / df;
        if (next - x).abs() < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

/// `count` points of the R_d sequence with a uniform random shift, row-major.
pub(crate) fn shifted_kronecker<R: Rng + ?Sized>(count: usize, dim: usize, rng: &mut R) -> Vec<f64> {
    let phi = generalized_golden_ratio(dim);
    let alpha: Vec<f64> = (1..=dim)
        .map(|k| libm::pow(1.0 / phi, k as f64))
        .collect();
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count * dim);
    for i in 0..count {
        for (a, s) in alpha.iter().zip(&shift) {
            let v = s + (i + 1) as f64 * a;
            out.push(v - libm::floor(v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::SeedableRng;

    #[test]
    fn golden_ratio_in_one_dimension() {
        assert!((generalized_golden_ratio(1) - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn points_fill_each_axis_evenly() {
        let mut rng = SmallRng::seed_from_u64(0);
        let n = 1000;
        let pts = shifted_kronecker(n, 3, &mut rng);
        for d in 0..3 {
            let mut bins = [0usize; 10];
            for i in 0..n {
                let v = pts[i * 3 + d];
                assert!((0.0..1.0).contains(&v));
                bins[(v * 10.0) as usize] += 1;
            }
            assert!(bins.iter().all(|&b| (90..=110).contains(&b)), "{bins:?}");
        }
    }
}
