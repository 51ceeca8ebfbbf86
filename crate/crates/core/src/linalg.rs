//! Dense row-major helpers for the small symmetric systems a GP needs.

use alloc::vec::Vec;

use crate::math::{log, sqrt};

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let (ac, bc) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ac
        .remainder()
        .iter()
        .zip(bc.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ac.zip(bc) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Writes the lower Cholesky factor of `a` (lower triangle read) into `l`,
/// zeroing the strict upper triangle. Returns `false` on a non-positive pivot.
pub(crate) fn factor_lower(a: &[f64], n: usize, l: &mut Vec<f64>) -> bool {
    debug_assert_eq!(a.len(), n * n);
    l.clear();
    l.resize(n * n, 0.0);
    for i in 0..n {
        for j in 0..=i {
            let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            let sum = a[i * n + j] - dot(ri, rj);
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return false;
                }
                l[i * n + i] = sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    true
}

/// Solves `L z = b` in place.
pub(crate) fn solve_lower(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let s = dot(&l[i * n..i * n + i], &b[..i]);
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Solves `L^T z = b` in place.
pub(crate) fn solve_upper(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let bi = b[i] / l[i * n + i];
        b[i] = bi;
        for (bk, lik) in b[..i].iter_mut().zip(&l[i * n..i * n + i]) {
            *bk -= lik * bi;
        }
    }
}

/// `log det(L L^T)`.
pub(crate) fn log_det(l: &[f64], n: usize) -> f64 {
    2.0 * (0..n).map(|i| log(l[i * n + i])).sum::<f64>()
}

/// Lower triangle of `(L L^T)^{-1}` into `inv`; `m` is scratch. Entries above
/// the diagonal are left unspecified.
pub(crate) fn inverse_lower(l: &[f64], n: usize, m: &mut Vec<f64>, inv: &mut Vec<f64>) {
    // row j of `m` holds column j of L^{-1}, from index j on
    m.resize(n * n, 0.0);
    inv.resize(n * n, 0.0);
    for j in 0..n {
        let col = &mut m[j * n..(j + 1) * n];
        col[j] = 1.0 / l[j * n + j];
        for i in j + 1..n {
            let s = dot(&l[i * n + j..i * n + i], &col[j..i]);
            col[i] = -s / l[i * n + i];
        }
    }
    // A^{-1}_{ab} = sum_k L^{-1}_{ka} L^{-1}_{kb}, k >= max(a, b)
    for a in 0..n {
        let ra = &m[a * n + a..(a + 1) * n];
        for b in 0..=a {
            inv[a * n + b] = dot(ra, &m[b * n + a..(b + 1) * n]);
        }
    }
}

/// Lower-triangular Cholesky factor stored row-major in an `n * n` buffer.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes the symmetric matrix `a` (only the lower triangle is read).
    /// Returns `None` when a pivot is not strictly positive.
    #[cfg(test)]
    pub(crate) fn new(a: &[f64], n: usize) -> Option<Self> {
        let mut l = Vec::new();
        factor_lower(a, n, &mut l).then_some(Self { n, l })
    }

    pub(crate) fn from_factor(n: usize, l: Vec<f64>) -> Self {
        Self { n, l }
    }

    pub(crate) fn factor(&self) -> &[f64] {
        &self.l
    }

    pub(crate) fn solve_lower_in_place(&self, b: &mut [f64]) {
        solve_lower(&self.l, self.n, b);
    }

    pub(crate) fn solve_upper_in_place(&self, b: &mut [f64]) {
        solve_upper(&self.l, self.n, b);
    }

    /// Solves `A z = b` with `A = L L^T`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut z = b.to_vec();
        self.solve_lower_in_place(&mut z);
        self.solve_upper_in_place(&mut z);
        z
    }

    pub(crate) fn log_det(&self) -> f64 {
        log_det(&self.l, self.n)
    }

    /// Full symmetric inverse `A^{-1}`, row-major.
    #[cfg(test)]
    pub(crate) fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let (mut m, mut inv) = (Vec::new(), Vec::new());
        inverse_lower(&self.l, n, &mut m, &mut inv);
        for a in 0..n {
            for b in a + 1..n {
                inv[a * n + b] = inv[b * n + a];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spd(n: usize) -> Vec<f64> {
        // B B^T + n I with a deterministic B
        let b: Vec<f64> = (0..n * n).map(|k| libm::sin(k as f64 * 0.7) + 0.1).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += n as f64;
        }
        a
    }

    #[test]
    fn factor_reconstructs_matrix() {
        let n = 7;
        let a = spd(n);
        let c = Cholesky::new(&a, n).unwrap();
        let l = c.factor();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
                assert!((r - a[i * n + j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_and_solve_agree() {
        let n = 6;
        let a = spd(n);
        let c = Cholesky::new(&a, n).unwrap();
        let inv = c.inverse();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| a[i * n + k] * inv[k * n + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((r - want).abs() < 1e-10);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let z = c.solve(&b);
        for i in 0..n {
            let r: f64 = (0..n).map(|k| a[i * n + k] * z[k]).sum();
            assert!((r - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(Cholesky::new(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
        assert!(Cholesky::new(&[0.0], 1).is_none());
    }
}
