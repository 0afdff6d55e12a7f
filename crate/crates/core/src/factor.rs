//! Rank-k approximations `A_k = U·D_k·Vᵀ` and their two-factor export
//! `A_k = (U√D′_k)·(√D′_kᵀVᵀ)`.

use alloc::vec::Vec;

use crate::decomp::svd;
use crate::error::{Error, Result};
use crate::lpsvd::{lp_svd, lp_svd_randomized, ConditionerConfig, LpSvd, LpSvdConfig};
use crate::math;
use crate::matrix::{check_p, DenseMatrix, DiagMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    LpDeterministic,
    LpRandomized,
    L2Svd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LpDeterministic => "lowner",
            Method::LpRandomized => "randomized",
            Method::L2Svd => "svd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LowRankConfig {
    pub lp: LpSvdConfig,
    pub conditioner: ConditionerConfig,
    /// Seed for the randomized conditioner.
    pub seed: u64,
}

/// Work done by the ellipsoid method; zero for the other paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Iterations {
    pub central: usize,
    pub shallow: usize,
    pub refine_rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankKApprox {
    pub k: usize,
    pub method: Method,
    /// `diag(σ₁, …, σ_k, 0, …, 0)`.
    pub dk: DiagMatrix,
    /// `U·√D′_k`, `n × k`.
    pub left: DenseMatrix,
    /// `√D′_kᵀ·Vᵀ`, `k × d`.
    pub right: DenseMatrix,
    pub sigmas: Vec<f64>,
    /// The input had more columns than rows and was transposed first.
    pub transposed: bool,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub p: f64,
    pub distortion: f64,
    pub iterations: Iterations,
}

impl RankKApprox {
    /// Truncates a factorisation `U·diag(σ)·Vᵀ` (σ non-increasing) to its
    /// first `k` terms. Equal σ values keep their index order.
    #[allow(clippy::too_many_arguments)]
    pub fn truncate(
        u: &DenseMatrix,
        sigmas: &[f64],
        v: &DenseMatrix,
        k: usize,
        method: Method,
        p: f64,
        distortion: f64,
        transposed: bool,
    ) -> Result<Self> {
        let d = sigmas.len();
        check_rank(k, d)?;
        let dk: Vec<f64> = (0..d)
            .map(|i| if i < k { sigmas[i] } else { 0.0 })
            .collect();
        let roots: Vec<f64> = sigmas[..k].iter().map(|s| math::sqrt(*s)).collect();
        let left = u.leading_columns(k).scale_columns(&roots);
        let right = v.leading_columns(k).scale_columns(&roots).transpose();
        Ok(Self {
            k,
            method,
            dk: DiagMatrix::new(dk),
            left,
            right,
            sigmas: sigmas.to_vec(),
            transposed,
            u: u.clone(),
            v: v.clone(),
            p,
            distortion,
            iterations: Iterations::default(),
        })
    }

    pub fn from_lp_svd(f: &LpSvd, k: usize, method: Method, transposed: bool) -> Result<Self> {
        let mut out = Self::truncate(
            &f.u,
            f.d.entries(),
            &f.v,
            k,
            method,
            f.p,
            f.distortion,
            transposed,
        )?;
        if let Some(l) = &f.lowner {
            out.iterations = Iterations {
                central: l.iterations_central,
                shallow: l.iterations_shallow,
                refine_rounds: l.refine_rounds,
            };
        }
        Ok(out)
    }

    /// The same factorisation truncated at another rank.
    pub fn with_rank(&self, k: usize) -> Result<Self> {
        let mut out = Self::truncate(
            &self.u,
            &self.sigmas,
            &self.v,
            k,
            self.method,
            self.p,
            self.distortion,
            self.transposed,
        )?;
        out.iterations = self.iterations;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.sigmas.len()
    }

    /// `U·D_k·Vᵀ` in the oriented (rows ≥ cols) frame.
    pub fn triple_product(&self) -> DenseMatrix {
        self.u
            .scale_columns(self.dk.entries())
            .matmul(&self.v.transpose())
    }
}

fn check_rank(k: usize, d: usize) -> Result<()> {
    if k == 0 || k >= d {
        return Err(Error::InvalidRank {
            k,
            max: d.saturating_sub(1),
        });
    }
    Ok(())
}

/// Returns `A` when `rows ≥ cols`, otherwise `Aᵀ`, with the flag telling
/// which. Entry-wise errors are transpose invariant.
pub fn orient(a: &DenseMatrix) -> (DenseMatrix, bool) {
    if a.rows() >= a.cols() {
        (a.clone(), false)
    } else {
        (a.transpose(), true)
    }
}

/// Rank-`k` ℓp approximation. Wide inputs are transposed first.
pub fn lp_low_rank(
    a: &DenseMatrix,
    k: usize,
    p: f64,
    method: Method,
    cfg: &LowRankConfig,
) -> Result<RankKApprox> {
    check_p(p)?;
    let (oriented, transposed) = orient(a);
    check_rank(k, oriented.cols())?;
    let fact = match method {
        Method::LpDeterministic => lp_svd(&oriented, p, &cfg.lp)?,
        Method::LpRandomized => lp_svd_randomized(&oriented, p, cfg.seed, &cfg.conditioner)?,
        Method::L2Svd => {
            let mut out = l2_low_rank(a, k)?;
            out.p = p;
            return Ok(out);
        }
    };
    RankKApprox::from_lp_svd(&fact, k, method, transposed)
}

/// Rank-`k` truncated SVD, the ℓ2-optimal approximation.
pub fn l2_low_rank(a: &DenseMatrix, k: usize) -> Result<RankKApprox> {
    let (oriented, transposed) = orient(a);
    check_rank(k, oriented.cols())?;
    let s = svd(&oriented)?;
    RankKApprox::truncate(
        &s.u,
        s.s.entries(),
        &s.v,
        k,
        Method::L2Svd,
        2.0,
        1.0,
        transposed,
    )
}

/// `left·right`, transposed back to the caller's orientation.
pub fn assemble(approx: &RankKApprox) -> DenseMatrix {
    let prod = approx.left.matmul(&approx.right);
    if approx.transposed {
        prod.transpose()
    } else {
        prod
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    /// 1-based index of the σ in `upper` (always `k + 1`).
    pub upper_sigma_index: usize,
    /// `upper` with `σ_k` in place of `σ_{k+1}`.
    pub upper_stated: f64,
    /// `lower` is reported but is not a valid bound for the ℓp methods.
    pub lower_informational: bool,
    pub method: Method,
}

/// Error bounds on `‖A − A_k‖_{p,p}^p` for an `n × d` input.
///
/// * deterministic: `d·σ_d^p` (informational) and `d^{1+p/2}·σ_{k+1}^p`;
/// * randomized: `d·σ_d^p` (informational) and
///   `d^{1+p}·(d³ + d² ln n)^{|1−p/2|}·σ_{k+1}^p`;
/// * SVD: `t = Σ_{i>k} σ_i²` is the exact squared Frobenius error, and norm
///   equivalence between `ℓ_p` and `ℓ_2` on `nd` entries gives
///   `[t^{p/2}, (nd)^{1−p/2} t^{p/2}]` for `p ≤ 2`, reversed for `p > 2`.
///
/// The lower bound of the ℓp methods fails on simple inputs (for
/// `diag(3,2,1)`, `k = 2`, `p = 1` the error is 1 while `d·σ_d^p = 3`): the
/// argument behind it needs a positive smallest singular value of `D − D_k`,
/// which is zero.
pub fn error_bounds(
    sigmas: &[f64],
    k: usize,
    p: f64,
    d: usize,
    n: usize,
    method: Method,
) -> Result<BoundPair> {
    check_p(p)?;
    check_rank(k, d)?;
    if sigmas.len() != d {
        return Err(Error::DataLength {
            expected: d,
            got: sigmas.len(),
        });
    }
    let df = d as f64;
    let sp = |s: f64| math::powf(s, p);
    let (lower, factor, informational) = match method {
        Method::LpDeterministic => (df * sp(sigmas[d - 1]), math::powf(df, 1.0 + p / 2.0), true),
        Method::LpRandomized => {
            let base = df * df * df + df * df * math::ln(n as f64);
            let f = math::powf(df, 1.0 + p) * math::powf(base, math::abs(1.0 - p / 2.0));
            (df * sp(sigmas[d - 1]), f, true)
        }
        Method::L2Svd => {
            let tail: f64 = sigmas[k..].iter().map(|s| s * s).sum();
            let t = math::powf(tail, p / 2.0);
            let spread = math::powf((n * d) as f64, 1.0 - p / 2.0);
            let (lo, hi) = if p <= 2.0 {
                (t, spread * t)
            } else {
                (spread * t, t)
            };
            let stated_tail: f64 = sigmas[k - 1..].iter().map(|s| s * s).sum();
            return Ok(BoundPair {
                lower: lo,
                upper: hi,
                upper_sigma_index: k + 1,
                upper_stated: if p <= 2.0 { spread } else { 1.0 }
                    * math::powf(stated_tail, p / 2.0),
                lower_informational: false,
                method,
            });
        }
    };
    Ok(BoundPair {
        lower,
        upper: factor * sp(sigmas[k]),
        upper_sigma_index: k + 1,
        upper_stated: factor * sp(sigmas[k - 1]),
        lower_informational: informational,
        method,
    })
}
