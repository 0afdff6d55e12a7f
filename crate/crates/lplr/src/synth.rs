//! Synthetic "low-rank plus noise plus outliers" matrices.

use lplr_core::rng::{gaussian_vector, seeded, streams};
use lplr_core::DenseMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub k_true: usize,
    pub outlier_fraction: f64,
    pub noise_sigma: f64,
    pub outlier_scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("k_true = {k_true} must be in [1, d) with d = {d}")]
    Rank { k_true: usize, d: usize },
    #[error("outlier_fraction = {0} must lie in [0, 1)")]
    OutlierFraction(f64),
    #[error("noise_sigma = {0} must be >= 0")]
    Noise(f64),
    #[error("outlier_scale = {0} must be >= 1")]
    OutlierScale(f64),
    #[error("n must be positive")]
    Empty,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.n == 0 {
            return Err(SpecError::Empty);
        }
        if self.k_true == 0 || self.k_true >= self.d {
            return Err(SpecError::Rank {
                k_true: self.k_true,
                d: self.d,
            });
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(SpecError::OutlierFraction(self.outlier_fraction));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(SpecError::Noise(self.noise_sigma));
        }
        if !(self.outlier_scale >= 1.0) {
            return Err(SpecError::OutlierScale(self.outlier_scale));
        }
        Ok(())
    }

    pub fn outlier_count(&self) -> usize {
        (self.outlier_fraction * self.n as f64).floor() as usize
    }
}

/// Rows are `cᵢᵀB + εᵢ` with a Gaussian `k_true × d` basis `B`, Gaussian
/// coefficients `cᵢ` and noise `εᵢ ~ N(0, noise_sigma² I)`; then
/// `⌊outlier_fraction·n⌋` distinct rows are multiplied by `outlier_scale`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DenseMatrix, SpecError> {
    spec.validate()?;
    let (n, d, k) = (spec.n, spec.d, spec.k_true);
    let mut rng = seeded(spec.seed, streams::SYNTH);
    let basis: Vec<Vec<f64>> = (0..k).map(|_| gaussian_vector(&mut rng, d)).collect();
    let mut a = DenseMatrix::zeros(n, d);
    for i in 0..n {
        let coeffs = gaussian_vector(&mut rng, k);
        let noise = gaussian_vector(&mut rng, d);
        let row = a.row_mut(i);
        for (j, slot) in row.iter_mut().enumerate() {
            let signal: f64 = coeffs.iter().zip(&basis).map(|(c, b)| c * b[j]).sum();
            *slot = signal + spec.noise_sigma * noise[j];
        }
    }
    for i in index::sample(&mut rng, n, spec.outlier_count()).into_iter() {
        for v in a.row_mut(i) {
            *v *= spec.outlier_scale;
        }
    }
    Ok(a)
}
