//! Random sketches `S·A` used to condition `A` for the ℓp norm.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::math;
use crate::matrix::DenseMatrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SketchKind {
    /// Pick by `p`: sparse p-stable for `p < 2`, Gaussian for `p = 2`,
    /// row sampling for `p > 2`.
    Auto,
    /// `S = I`; for tests.
    Identity,
    /// Dense `N(0, 1/m)` sketch with `rows` rows.
    Gaussian { rows: usize },
    /// Each row of `A` is hashed to one of `rows` buckets and scaled by a
    /// symmetric p-stable variate. With `rows ≥ n` the hash is a random
    /// injection.
    SparseStable { rows: usize },
    /// `rows` rows of `A` sampled uniformly with replacement, scaled by
    /// `(n/m)^{1/p}`.
    Sampling { rows: usize },
}

impl SketchKind {
    /// Resolves [`SketchKind::Auto`] for an `n × d` input.
    pub fn resolve(self, n: usize, d: usize, p: f64) -> SketchKind {
        match self {
            SketchKind::Auto if p < 2.0 => SketchKind::SparseStable {
                rows: n.min(8 * d * d),
            },
            SketchKind::Auto if p == 2.0 => SketchKind::Gaussian { rows: 4 * d },
            SketchKind::Auto => {
                let m = libm::ceil(8.0 * (d * d) as f64 * math::ln(n as f64)) as usize;
                SketchKind::Sampling {
                    rows: n.min(m.max(d)),
                }
            }
            other => other,
        }
    }

    pub fn rows(self, n: usize) -> usize {
        match self {
            SketchKind::Auto | SketchKind::Identity => n,
            SketchKind::Gaussian { rows }
            | SketchKind::SparseStable { rows }
            | SketchKind::Sampling { rows } => rows,
        }
    }
}

/// Symmetric α-stable variate (Chambers–Mallows–Stuck), `α ∈ [1, 2]`.
/// `α = 1` is the standard Cauchy distribution.
pub fn stable_variate(alpha: f64, rng: &mut Rng) -> f64 {
    let half_pi = core::f64::consts::FRAC_PI_2;
    let theta = (rng.random::<f64>() - 0.5) * core::f64::consts::PI;
    if alpha == 1.0 {
        return libm::tan(theta);
    }
    let w: f64 = Exp1.sample(rng);
    let lead = libm::sin(alpha * theta) / math::powf(libm::cos(theta), 1.0 / alpha);
    let tail = math::powf(libm::cos(theta - alpha * theta) / w, (1.0 - alpha) / alpha);
    debug_assert!(theta.abs() < half_pi);
    lead * tail
}

/// Applies a (resolved) sketch to `a`.
pub fn apply(a: &DenseMatrix, p: f64, kind: SketchKind, rng: &mut Rng) -> DenseMatrix {
    let (n, d) = a.shape();
    match kind.resolve(n, d, p) {
        SketchKind::Auto | SketchKind::Identity => a.clone(),
        SketchKind::Gaussian { rows } => {
            let scale = 1.0 / math::sqrt(rows as f64);
            let mut out = DenseMatrix::zeros(rows, d);
            for r in 0..rows {
                let coeffs: Vec<f64> = (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        scale * z
                    })
                    .collect();
                let row = a.tr_matvec(&coeffs);
                out.row_mut(r).copy_from_slice(&row);
            }
            out
        }
        SketchKind::SparseStable { rows } => {
            let alpha = p.clamp(1.0, 2.0);
            let mut out = DenseMatrix::zeros(rows, d);
            // with at least as many buckets as rows, hash without collisions
            let perm: Option<Vec<usize>> = (rows >= n).then(|| {
                let mut idx: Vec<usize> = (0..rows).collect();
                idx.shuffle(rng);
                idx
            });
            for i in 0..n {
                let bucket = match &perm {
                    Some(idx) => idx[i],
                    None => rng.random_range(0..rows),
                };
                let s = stable_variate(alpha, rng);
                let src = a.row(i).to_vec();
                for (o, v) in out.row_mut(bucket).iter_mut().zip(&src) {
                    *o += s * v;
                }
            }
            out
        }
        SketchKind::Sampling { rows } => {
            let scale = math::powf(n as f64 / rows as f64, 1.0 / p);
            let mut out = DenseMatrix::zeros(rows, d);
            for r in 0..rows {
                let i = rng.random_range(0..n);
                let src: Vec<f64> = a.row(i).iter().map(|v| scale * v).collect();
                out.row_mut(r).copy_from_slice(&src);
            }
            out
        }
    }
}
