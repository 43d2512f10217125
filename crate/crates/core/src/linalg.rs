//! Symmetric banded matrices with a Cholesky factorization.
//!
//! The stiffness systems assembled on the structured mesh have small
//! bandwidth under row-major node ordering, so a banded direct solve is both
//! exact to round-off and cheap: `O(dim * bandwidth^2)` to factor.

use crate::error::{Error, Result};

/// Symmetric matrix stored as its lower band.
///
/// `data[i * (bandwidth + 1) + d]` holds `A[i][i - d]` for `d <= bandwidth`.
#[derive(Debug, Clone)]
pub struct SymBandMatrix {
    dim: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn new(dim: usize, bandwidth: usize) -> Self {
        SymBandMatrix {
            dim,
            bandwidth,
            data: vec![0.0; dim * (bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, d: usize) -> usize {
        i * (self.bandwidth + 1) + d
    }

    /// Adds to the lower-triangle entry `A[i][j]`; requires `i >= j` and
    /// `i - j <= bandwidth`. The symmetric counterpart is implied.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i >= j && i - j <= self.bandwidth);
        let d = i - j;
        let s = self.slot(i, d);
        self.data[s] += value;
    }

    /// Entry `A[i][j]`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bandwidth {
            return 0.0;
        }
        self.data[hi * (self.bandwidth + 1) + (hi - lo)]
    }

    /// `y = A x` using the symmetric band.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            y[i] += self.data[self.slot(i, 0)] * x[i];
            let reach = self.bandwidth.min(i);
            for d in 1..=reach {
                let a = self.data[self.slot(i, d)];
                if a != 0.0 {
                    y[i] += a * x[i - d];
                    y[i - d] += a * x[i];
                }
            }
        }
        y
    }

    /// Dense copy, for small test instances.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Banded Cholesky factorization `A = L L^T`.
    ///
    /// Fails with [`Error::NotPositiveDefinite`] when a pivot is not strictly
    /// positive.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let bw = self.bandwidth;
        let mut l = self.data.clone();
        let at = |buf: &[f64], i: usize, j: usize| buf[i * (bw + 1) + (i - j)];
        for j in 0..self.dim {
            let mut diag = at(&l, j, j);
            for k in j.saturating_sub(bw)..j {
                let ljk = at(&l, j, k);
                diag -= ljk * ljk;
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let pivot = diag.sqrt();
            l[j * (bw + 1)] = pivot;
            let last = (j + bw).min(self.dim.saturating_sub(1));
            for i in (j + 1)..=last {
                let mut s = at(&l, i, j);
                for k in i.saturating_sub(bw)..j {
                    s -= at(&l, i, k) * at(&l, j, k);
                }
                l[i * (bw + 1) + (i - j)] = s / pivot;
            }
        }
        Ok(BandCholesky {
            dim: self.dim,
            bandwidth: bw,
            data: l,
        })
    }
}

/// Lower-band Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    dim: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    /// Solves `L L^T x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.dim);
        let bw = self.bandwidth;
        let at = |i: usize, j: usize| self.data[i * (bw + 1) + (i - j)];

        // forward: L y = b
        let mut x = b.to_vec();
        for i in 0..self.dim {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= at(i, k) * x[k];
            }
            x[i] = s / at(i, i);
        }
        // backward: L^T x = y
        for i in (0..self.dim).rev() {
            let mut s = x[i];
            let last = (i + bw).min(self.dim - 1);
            for k in (i + 1)..=last {
                s -= at(k, i) * x[k];
            }
            x[i] = s / at(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_spd() -> SymBandMatrix {
        // tridiagonal [2, -1] system of dimension 5
        let mut a = SymBandMatrix::new(5, 1);
        for i in 0..5 {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn matvec_matches_dense() {
        let a = sample_spd();
        let dense = a.to_dense();
        let x: Vec<f64> = (0..5).map(|i| (i as f64) - 1.5).collect();
        let y = a.matvec(&x);
        for i in 0..5 {
            let want: f64 = (0..5).map(|j| dense[i][j] * x[j]).sum();
            assert!((y[i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_solves_to_roundoff() {
        let a = sample_spd();
        let b = vec![1.0, 0.0, 2.0, -1.0, 0.5];
        let x = a.cholesky().unwrap().solve(&b);
        let r = a.matvec(&x);
        for i in 0..5 {
            assert!((r[i] - b[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = SymBandMatrix::new(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 3.0);
        a.add(1, 1, 1.0); // determinant negative
        match a.cholesky() {
            Err(Error::NotPositiveDefinite { pivot: 1 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }
}
