use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{DistanceProfile, SparseGenerator};
use crate::error::{Error, Result};

/// `exp(tQ) = V diag(exp(t lambda_i)) V^T` for a symmetric generator.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SpectralPropagator {
    pub fn new(q: &SparseGenerator) -> Result<Self> {
        if !q.is_symmetric(1e-12) {
            return Err(Error::Numerical("spectral propagation needs a symmetric generator".into()));
        }
        let eig = SymmetricEigen::new(q.to_dense());
        Ok(SpectralPropagator {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn matrix(&self, t: f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= (self.values[j] * t).exp();
        }
        &scaled * self.vectors.transpose()
    }

    pub fn row(&self, i: usize, t: f64) -> Vec<f64> {
        let n = self.dim();
        let mut coef = DVector::zeros(n);
        for j in 0..n {
            coef[j] = self.vectors[(i, j)] * (self.values[j] * t).exp();
        }
        (&self.vectors * coef).iter().copied().collect()
    }

    /// Row sums of `exp(tQ)`: survival probabilities of a killed chain.
    pub fn survival(&self, t: f64) -> Vec<f64> {
        if t == 0.0 {
            return vec![1.0; self.dim()];
        }
        let ones = DVector::from_element(self.dim(), 1.0);
        let mut proj = self.vectors.transpose() * ones;
        for j in 0..self.dim() {
            proj[j] *= (self.values[j] * t).exp();
        }
        (&self.vectors * proj).iter().map(|x| x.clamp(0.0, 1.0)).collect()
    }
}

impl DistanceProfile for SpectralPropagator {
    fn distance(&self, t: f64) -> f64 {
        let m = self.matrix(t);
        let u = 1.0 / self.dim() as f64;
        m.row_iter()
            .map(|r| r.iter().map(|&x| (x - u).max(0.0)).sum::<f64>())
            .fold(0.0, f64::max)
            .min(1.0)
    }

    fn time_scale(&self) -> f64 {
        let m = self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if m > 0.0 {
            1.0 / m
        } else {
            1.0
        }
    }
}
