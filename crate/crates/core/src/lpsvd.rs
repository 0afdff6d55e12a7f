//! ‖·‖p-SVD factorisations `A = U·D·Vᵀ` with
//! `‖DVᵀx‖₂ ≤ ‖Ax‖_p ≤ κ·‖DVᵀx‖₂`.

use alloc::vec::Vec;

use crate::decomp::{invert, qr, svd};
use crate::error::{Error, Result};
use crate::lowner::{lowner, LownerConfig, LownerResult};
use crate::math;
use crate::matrix::{check_p, norm2, vector_pnorm, DenseMatrix, DiagMatrix};
use crate::rng::{self, streams};
use crate::sketch::{self, SketchKind};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSvd {
    pub u: DenseMatrix,
    /// `σ₁ ≥ … ≥ σ_d > 0`.
    pub d: DiagMatrix,
    pub v: DenseMatrix,
    pub p: f64,
    /// The `κ` of the upper inequality: `√d·(1 + slack)` on the deterministic
    /// path, the measured `κ̂` on the randomized one.
    pub distortion: f64,
    /// Ellipsoid-method diagnostics on the deterministic path.
    pub lowner: Option<LownerResult>,
}

impl LpSvd {
    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.u
            .scale_columns(self.d.entries())
            .matmul(&self.v.transpose())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSvdConfig {
    pub lowner: LownerConfig,
    /// Relative slack covering ellipsoid-method inexactness.
    pub slack: f64,
}

impl Default for LpSvdConfig {
    fn default() -> Self {
        Self {
            lowner: LownerConfig::default(),
            slack: 0.1,
        }
    }
}

/// `U = A·(DVᵀ)⁻¹`.
fn left_factor(a: &DenseMatrix, d: &DiagMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    let dvt = v.scale_columns(d.entries()).transpose();
    Ok(a.matmul(&invert(&dvt)?))
}

fn check_shape(a: &DenseMatrix) -> Result<()> {
    let (n, d) = a.shape();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if n < d {
        return Err(Error::RankDeficient);
    }
    Ok(())
}

/// Deterministic ‖·‖p-SVD from the Löwner ellipsoid of `{x : ‖Ax‖_p ≤ 1}`.
pub fn lp_svd(a: &DenseMatrix, p: f64, cfg: &LpSvdConfig) -> Result<LpSvd> {
    check_p(p)?;
    check_shape(a)?;
    let res = lowner(a, p, &cfg.lowner)?;
    let u = left_factor(a, &res.d, &res.v)?;
    let d = a.cols();
    Ok(LpSvd {
        u,
        d: res.d.clone(),
        v: res.v.clone(),
        p,
        distortion: math::sqrt(d as f64) * (1.0 + cfg.slack),
        lowner: Some(res),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionerConfig {
    pub sketch: SketchKind,
    /// Gaussian directions used to rescale `R` and measure `κ̂`.
    pub samples: usize,
    /// Fresh-seed retries after a rank-deficient sketch.
    pub retries: usize,
}

impl Default for ConditionerConfig {
    fn default() -> Self {
        Self {
            sketch: SketchKind::Auto,
            samples: 1000,
            retries: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conditioner {
    /// Upper triangular, rescaled so `‖Rx‖₂ ≤ ‖Ax‖_p` on every sample.
    pub r: DenseMatrix,
    /// `A·R⁻¹`.
    pub u: DenseMatrix,
    /// Measured distortion `max ratio / min ratio`.
    pub kappa_hat: f64,
    pub sketch_rows: usize,
    pub attempts: usize,
}

/// `d·(d³ + d² ln n)^{|1/p − 1/2|}`, the conditioner distortion target.
pub fn conditioner_distortion_bound(d: usize, n: usize, p: f64) -> f64 {
    let df = d as f64;
    let base = df * df * df + df * df * math::ln(n as f64);
    df * math::powf(base, math::abs(1.0 / p - 0.5))
}

/// Sketch `A`, take `R` from `qr(S·A)`, then rescale `R` by the smallest
/// sampled ratio `‖Ax‖_p / ‖Rx‖₂`.
pub fn randomized_conditioner(
    a: &DenseMatrix,
    p: f64,
    seed: u64,
    cfg: &ConditionerConfig,
) -> Result<Conditioner> {
    check_p(p)?;
    let (n, d) = a.shape();
    if n < d {
        return Err(Error::RankDeficient);
    }
    let kind = cfg.sketch.resolve(n, d, p);
    let mut attempt = 0;
    let r0 = loop {
        let mut rng = rng::seeded(seed.wrapping_add(attempt as u64), streams::SKETCH);
        let sa = sketch::apply(a, p, kind, &mut rng);
        attempt += 1;
        match qr(&sa) {
            Ok((_, r)) => break r,
            Err(Error::RankDeficient) | Err(Error::ShapeMismatch { .. })
                if attempt <= cfg.retries =>
            {
                continue
            }
            Err(Error::ShapeMismatch { .. }) => return Err(Error::RankDeficient),
            Err(e) => return Err(e),
        }
    };

    let v = svd(&r0)?.v;
    let samples = sample_directions(&v, cfg.samples, seed);
    let (lo, hi) = ratio_extremes(a, p, &samples, |x| norm2(&r0.matvec(x)));
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(Error::RankDeficient);
    }
    let r = r0.scale(lo);
    let u = a.matmul(&invert(&r)?);
    Ok(Conditioner {
        r,
        u,
        kappa_hat: hi / lo,
        sketch_rows: kind.rows(n),
        attempts: attempt,
    })
}

/// ‖·‖p-SVD from the conditioner: `(·, D, V) = svd(R)`, `U = A(DVᵀ)⁻¹`.
pub fn lp_svd_randomized(
    a: &DenseMatrix,
    p: f64,
    seed: u64,
    cfg: &ConditionerConfig,
) -> Result<LpSvd> {
    check_shape(a)?;
    let cond = randomized_conditioner(a, p, seed, cfg)?;
    let s = svd(&cond.r)?;
    let u = left_factor(a, &s.s, &s.v)?;
    Ok(LpSvd {
        u,
        d: s.s,
        v: s.v,
        p,
        distortion: cond.kappa_hat,
        lowner: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    /// `min ‖Ax‖_p / ‖DVᵀx‖₂` over the samples.
    pub lo: f64,
    /// `max ‖Ax‖_p / ‖DVᵀx‖₂` over the samples.
    pub hi: f64,
}

/// Gaussian directions followed by `±vᵢ` for every column of `v`
/// (the axis directions of the ellipsoid `‖DVᵀx‖₂ ≤ 1`).
pub fn sample_directions(v: &DenseMatrix, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = v.rows();
    let mut out = rng::gaussian_directions(d, count, seed);
    for j in 0..v.cols() {
        let col = v.column(j);
        out.push(col.iter().map(|x| -x).collect());
        out.push(col);
    }
    out
}

fn ratio_extremes(
    a: &DenseMatrix,
    p: f64,
    samples: &[Vec<f64>],
    denom: impl Fn(&[f64]) -> f64,
) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for x in samples {
        let den = denom(x);
        if den == 0.0 {
            continue;
        }
        let ratio = vector_pnorm(&a.matvec(x), p) / den;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo, hi)
}

/// Empirical extremes of `‖Ax‖_p / ‖DVᵀx‖₂` over `num_samples` Gaussian
/// directions (drawn from `seed`) plus the `2d` axis directions.
pub fn sandwich_check(
    a: &DenseMatrix,
    p: f64,
    d: &DiagMatrix,
    v: &DenseMatrix,
    num_samples: usize,
    seed: u64,
) -> Sandwich {
    let dvt = v.scale_columns(d.entries()).transpose();
    let samples = sample_directions(v, num_samples, seed);
    let (lo, hi) = ratio_extremes(a, p, &samples, |x| norm2(&dvt.matvec(x)));
    Sandwich { lo, hi }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_formula() {
        let b = conditioner_distortion_bound(16, 2000, 1.0);
        let expected = 16.0 * (4096.0 + 256.0 * 2000f64.ln()).sqrt();
        assert!((b - expected).abs() < 1e-9);
        assert_eq!(conditioner_distortion_bound(5, 100, 2.0), 5.0);
    }

    #[test]
    fn sandwich_of_cross_polytope() {
        let a = DenseMatrix::identity(2);
        let id = DiagMatrix::new(alloc::vec![1.0, 1.0]);
        let s = sandwich_check(&a, 1.0, &id, &DenseMatrix::identity(2), 1000, 4);
        assert!((s.lo - 1.0).abs() < 1e-12);
        assert!(s.hi <= 2f64.sqrt() + 1e-12);
        assert!(s.hi > 2f64.sqrt() - 1e-3);
    }

    #[test]
    fn shape_errors() {
        let thin = DenseMatrix::from_fn(5, 1, |i, _| i as f64 + 1.0);
        assert_eq!(
            lp_svd(&thin, 1.0, &LpSvdConfig::default()),
            Err(Error::DimensionTooSmall(1))
        );
        let wide = DenseMatrix::from_fn(2, 3, |i, j| (i + j) as f64);
        assert_eq!(
            lp_svd(&wide, 1.0, &LpSvdConfig::default()),
            Err(Error::RankDeficient)
        );
        assert!(matches!(
            lp_svd(&DenseMatrix::identity(2), 0.5, &LpSvdConfig::default()),
            Err(Error::InvalidP(_))
        ));
    }
}
