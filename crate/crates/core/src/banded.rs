//! Symmetric banded matrices and their Cholesky factorization.

use crate::error::{Error, Result};

/// Symmetric matrix stored by its lower band: `band[i][d] = A[i][i - d]`
/// for `d = 0..=bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    bandwidth: usize,
    band: Vec<Vec<f64>>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            band: vec![vec![0.0; bandwidth + 1]; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            0.0
        } else {
            self.band[hi][d]
        }
    }

    /// Set `A[i][j] = A[j][i] = value`. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.bandwidth, "entry ({i}, {j}) outside band");
        self.band[hi][d] = value;
    }

    /// `self + scale * other` (bandwidths may differ).
    pub fn add_scaled(&self, scale: f64, other: &SymBandMatrix) -> SymBandMatrix {
        assert_eq!(self.n, other.n);
        let bw = self.bandwidth.max(other.bandwidth);
        let mut out = SymBandMatrix::zeros(self.n, bw);
        for i in 0..self.n {
            for d in 0..=bw.min(i) {
                let v = self.get(i, i - d) + scale * other.get(i, i - d);
                out.band[i][d] = v;
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.band[i][0] * x[i];
            for d in 1..=self.bandwidth.min(i) {
                let a = self.band[i][d];
                if a != 0.0 {
                    y[i] += a * x[i - d];
                    y[i - d] += a * x[i];
                }
            }
        }
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        BandCholesky::factor(self)
    }
}

/// `A = L Lᵀ` with `L` lower-banded with the same bandwidth as `A`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bandwidth: usize,
    // l[i][d] = L[i][i - d]
    l: Vec<Vec<f64>>,
}

impl BandCholesky {
    pub fn factor(a: &SymBandMatrix) -> Result<Self> {
        let n = a.n;
        let p = a.bandwidth;
        let mut l = vec![vec![0.0; p + 1]; n];
        for i in 0..n {
            let j_start = i.saturating_sub(p);
            for j in j_start..=i {
                let mut sum = a.get(i, j);
                let k_start = i.saturating_sub(p).max(j.saturating_sub(p));
                for k in k_start..j {
                    sum -= l[i][i - k] * l[j][j - k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::Internal(format!(
                            "matrix not positive definite at pivot {i} ({sum:e})"
                        )));
                    }
                    l[i][0] = sum.sqrt();
                } else {
                    l[i][i - j] = sum / l[j][0];
                }
            }
        }
        Ok(Self { n, bandwidth: p, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[allow(clippy::needless_range_loop)] // banded triangular sweeps read best indexed
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let p = self.bandwidth;
        let mut y = rhs.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in i.saturating_sub(p)..i {
                s -= self.l[i][i - k] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in (i + 1)..(i + p + 1).min(self.n) {
                s -= self.l[k][k - i] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> SymBandMatrix {
        let mut a = SymBandMatrix::zeros(n, 2);
        for i in 0..n {
            a.set(i, i, 4.0 + i as f64);
            if i >= 1 {
                a.set(i, i - 1, -0.5);
            }
            if i >= 2 {
                a.set(i, i - 2, 0.75);
            }
        }
        a
    }

    #[test]
    fn solve_recovers_known_vector() {
        let a = sample(9);
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let b = a.matvec(&x);
        let got = a.cholesky().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = SymBandMatrix::zeros(3, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, -1.0);
        a.set(2, 2, 1.0);
        assert!(a.cholesky().is_err());
    }

    #[test]
    fn symmetric_access() {
        let a = sample(5);
        assert_eq!(a.get(3, 1), a.get(1, 3));
        assert_eq!(a.get(4, 0), 0.0);
    }
}
