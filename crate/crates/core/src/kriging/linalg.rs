//! Dense Cholesky factorization for the kernel matrix.

use alloc::vec::Vec;

use crate::math;

/// Lower-triangular factor `L` with `K = L Lᵀ`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes the symmetric matrix `k` (row-major, `n × n`); `None` if it
    /// is not numerically positive definite.
    pub fn new(mut k: Vec<f64>, n: usize) -> Option<Self> {
        debug_assert_eq!(k.len(), n * n);
        for j in 0..n {
            let row_j = &k[j * n..j * n + j];
            let d = k[j * n + j] - row_j.iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0 && d.is_finite()) {
                return None;
            }
            let d = math::sqrt(d);
            k[j * n + j] = d;
            for v in &mut k[j * n + j + 1..(j + 1) * n] {
                *v = 0.0;
            }
            for i in j + 1..n {
                let (upper, lower) = k.split_at_mut(i * n);
                let row_j = &upper[j * n..j * n + j];
                let row_i = &mut lower[..n];
                let s = row_i[j] - row_i[..j].iter().zip(row_j).map(|(a, b)| a * b).sum::<f64>();
                row_i[j] = s / d;
            }
        }
        Some(Cholesky { n, l: k })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// Solves `L v = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(l, v)| l * v).sum();
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ v = b` in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// `K⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut v = b.to_vec();
        self.forward(&mut v);
        self.backward(&mut v);
        v
    }

    /// `ln det K`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| math::ln(self.at(i, i))).sum::<f64>()
    }
}
