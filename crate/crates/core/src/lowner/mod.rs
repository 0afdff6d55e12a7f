//! Löwner ellipsoid of the level set `L = {x : ‖Ax‖_p ≤ 1}`.
//!
//! The computation runs in two stages.
//!
//! 1. An ellipsoid method: start from a ball containing `L`, apply central
//!    cuts while the center lies outside `L`, then repeatedly test whether
//!    the vertices of the contracted ellipsoid `f·(E − c) + c` lie in `L`;
//!    the farthest escaping vertex yields a shallow cut. Every cut keeps
//!    `L ⊆ E` and strictly shrinks `det F`.
//! 2. A refinement that replaces the stage-one ellipsoid by the
//!    minimum-volume origin-centred ellipsoid through boundary points of
//!    `L` found by local search (see [`refine`]). It is only accepted when
//!    it has smaller volume and still passes the vertex test.
//!
//! Stage one alone stops as soon as the contracted vertices fit, which can
//! leave the ellipsoid a factor of up to `d` away from the Löwner
//! ellipsoid; stage two closes that gap.

mod refine;

use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::{cholesky, cholesky_log_det, cholesky_solve, invert, spd_eigen, svd};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{check_p, dot, vector_pnorm, DenseMatrix, DiagMatrix};

/// `E = {x : (x − c)ᵀ F⁻¹ (x − c) ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: Vec<f64>,
    /// The matrix `F`; symmetric positive definite.
    pub shape: DenseMatrix,
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, shape: DenseMatrix) -> Result<Self> {
        if !shape.is_square() || shape.rows() != center.len() {
            return Err(Error::ShapeMismatch {
                expected: (center.len(), center.len()),
                got: shape.shape(),
            });
        }
        cholesky(&shape)?;
        Ok(Self { center, shape })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let d = center.len();
        Self {
            center,
            shape: DenseMatrix::identity(d).scale(radius * radius),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn log_det(&self) -> Result<f64> {
        Ok(cholesky_log_det(&cholesky(&self.shape)?))
    }

    /// `(x − c)ᵀ F⁻¹ (x − c)`.
    pub fn distance_sq(&self, x: &[f64]) -> Result<f64> {
        let g = cholesky(&self.shape)?;
        Ok(distance_sq_with(&g, &self.center, x))
    }
}

fn distance_sq_with(chol: &DenseMatrix, center: &[f64], x: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    dot(&diff, &cholesky_solve(chol, &diff))
}

/// `L = {x : ‖Ax‖_p ≤ 1}` for a full-column-rank `A`.
#[derive(Debug, Clone)]
pub struct LevelSet {
    a: DenseMatrix,
    p: f64,
    membership_tol: f64,
    sigma_min: f64,
}

impl LevelSet {
    pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

    pub fn new(a: DenseMatrix, p: f64) -> Result<Self> {
        check_p(p)?;
        if a.rows() < a.cols() {
            return Err(Error::RankDeficient);
        }
        let s = svd(&a)?;
        let sv = s.s.entries();
        let (s_max, s_min) = (sv[0], sv[sv.len() - 1]);
        if !(s_min > 1e-10 * s_max) {
            return Err(Error::RankDeficient);
        }
        Ok(Self {
            a,
            p,
            membership_tol: Self::DEFAULT_MEMBERSHIP_TOL,
            sigma_min: s_min,
        })
    }

    pub fn with_membership_tol(mut self, tol: f64) -> Self {
        self.membership_tol = tol;
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `‖Ax‖_p`, the gauge of `L`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        vector_pnorm(&self.a.matvec(x), self.p)
    }

    pub fn member(&self, x: &[f64]) -> bool {
        self.gauge(x) <= 1.0 + self.membership_tol
    }

    /// A ball around the origin containing `L`, of radius
    /// `n^{max(0, 1/2 − 1/p)} / σ_min(A)`.
    ///
    /// For `x ∈ L`: `1 ≥ ‖Ax‖_p ≥ n^{−max(0, 1/2 − 1/p)}‖Ax‖₂ ≥
    /// n^{−max(0, 1/2 − 1/p)} σ_min ‖x‖₂`.
    pub fn initial_ball(&self) -> Ellipsoid {
        let n = self.a.rows() as f64;
        let exponent = (0.5 - 1.0 / self.p).max(0.0);
        let r = math::powf(n, exponent) / self.sigma_min;
        Ellipsoid::ball(vec![0.0; self.dim()], r)
    }

    /// Subgradient of `x ↦ ‖Ax‖_p`:
    /// `g = ‖Ax‖_p^{1−p} · Aᵀ (sign(Ax) ⊙ |Ax|^{p−1})`.
    ///
    /// It satisfies `gᵀx = ‖Ax‖_p` and `gᵀy ≤ ‖Ay‖_p` for every `y`, so
    /// `{y : gᵀy ≤ 1}` contains `L`.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.a.matvec(x);
        let norm = vector_pnorm(&r, self.p);
        if norm == 0.0 {
            return Err(Error::ZeroGradient);
        }
        let p = self.p;
        let w: Vec<f64> = if p == 1.0 {
            r.iter().map(|&v| sign(v)).collect()
        } else if p == 2.0 {
            r.iter().map(|&v| v / norm).collect()
        } else {
            r.iter()
                .map(|&v| sign(v) * math::abs_pow(v / norm, p - 1.0))
                .collect()
        };
        Ok(self.a.tr_matvec(&w))
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Unit normal-ish update vector `b = F h / √(hᵀ F h)` shared by every cut.
fn cut_direction(e: &Ellipsoid, h: &[f64]) -> Result<(Vec<f64>, f64)> {
    let fh = e.shape.matvec(h);
    let hfh = dot(h, &fh);
    if !(hfh > 0.0) {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            value: hfh,
        });
    }
    let root = math::sqrt(hfh);
    Ok((fh.iter().map(|v| v / root).collect(), root))
}

fn rank_one_update(e: &Ellipsoid, b: &[f64], step: f64, scale: f64, weight: f64) -> Ellipsoid {
    let d = e.dim();
    let center = e
        .center
        .iter()
        .zip(b)
        .map(|(c, bi)| c - step * bi)
        .collect();
    let shape = DenseMatrix::from_fn(d, d, |i, j| {
        scale * (e.shape[(i, j)] - weight * b[i] * b[j])
    });
    Ellipsoid { center, shape }
}

/// Central-cut update keeping `E ∩ {x : hᵀ(x − c) ≤ 0}`:
/// `c′ = c − b/(d+1)`, `F′ = d²/(d²−1)·(F − 2/(d+1)·bbᵀ)`.
pub fn central_cut(e: &Ellipsoid, h: &[f64]) -> Result<Ellipsoid> {
    let d = e.dim();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let (b, _) = cut_direction(e, h)?;
    let df = d as f64;
    Ok(rank_one_update(
        e,
        &b,
        1.0 / (df + 1.0),
        df * df / (df * df - 1.0),
        2.0 / (df + 1.0),
    ))
}

/// Shallow-cut update with depth `1/(d+1)`, enlarged by the rounding factor
/// `ζ = 1 + 1/(2d²(d+1)²)`:
/// `c′ = c − b/(d+1)²`, `F′ = ζσ(F − τbbᵀ)` with
/// `σ = d³(d+2)/((d+1)³(d−1))` and `τ = 2/(d(d+1))`.
///
/// The result contains `E ∩ {x : hᵀ(x − c) ≤ √(hᵀFh)/(d+1)}`.
pub fn shallow_cut(e: &Ellipsoid, h: &[f64]) -> Result<Ellipsoid> {
    let d = e.dim();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let (b, _) = cut_direction(e, h)?;
    let df = d as f64;
    let z = 1.0 / ((df + 1.0) * (df + 1.0));
    let sigma = df * df * df * (df + 2.0) / ((df + 1.0) * (df + 1.0) * (df + 1.0) * (df - 1.0));
    let zeta = 1.0 + 1.0 / (2.0 * df * df * (df + 1.0) * (df + 1.0));
    let tau = 2.0 / (df * (df + 1.0));
    Ok(rank_one_update(e, &b, z, zeta * sigma, tau))
}

/// Minimum-volume ellipsoid containing `E ∩ {x : hᵀ(x − c) ≤ β√(hᵀFh)}`
/// for a depth `β ∈ (−1, 1/d)`. `β = 0` is the central cut; negative `β`
/// gives a deep cut.
pub fn parametric_cut(e: &Ellipsoid, h: &[f64], beta: f64) -> Result<Ellipsoid> {
    let d = e.dim();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let df = d as f64;
    assert!(
        beta > -1.0 && beta < 1.0 / df,
        "cut depth {beta} outside (-1, 1/d)"
    );
    let (b, _) = cut_direction(e, h)?;
    let step = (1.0 - df * beta) / (df + 1.0);
    let scale = df * df * (1.0 - beta * beta) / (df * df - 1.0);
    let weight = 2.0 * (1.0 - df * beta) / ((df + 1.0) * (1.0 - beta));
    Ok(rank_one_update(e, &b, step, scale, weight))
}

/// The `2d` points `c ± factor·√λᵢ·qᵢ` where `F = Q diag(λ) Qᵀ`: the axis
/// endpoints of `factor·(E − c) + c`. Ordered `+q₀, −q₀, +q₁, …`.
pub fn contracted_vertices(e: &Ellipsoid, factor: f64) -> Result<Vec<Vec<f64>>> {
    let (lambda, q) = spd_eigen(&e.shape)?;
    let d = e.dim();
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        let len = factor * math::sqrt(lambda[i].max(0.0));
        for s in [1.0, -1.0] {
            out.push((0..d).map(|k| e.center[k] + s * len * q[(k, i)]).collect());
        }
    }
    Ok(out)
}

/// Contraction applied to the ellipsoid before the vertex test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contraction {
    /// `1/d`.
    InvD,
    /// `1/√d`, the inner radius a Löwner ellipsoid of a symmetric body
    /// guarantees.
    InvSqrtD,
}

impl Contraction {
    pub fn factor(self, d: usize) -> f64 {
        match self {
            Contraction::InvD => 1.0 / d as f64,
            Contraction::InvSqrtD => 1.0 / math::sqrt(d as f64),
        }
    }
}

/// How a cut at an escaping vertex is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutRule {
    /// Fixed-depth shallow cut ([`shallow_cut`]). When the `1/(d+1)`
    /// half-space would not contain `L`, the supporting half-space is used
    /// instead.
    Shallow,
    /// Always cut at the supporting half-space `{x : gᵀx ≤ 1}` of `L`.
    Supporting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LownerConfig {
    pub contraction: Contraction,
    pub cut_rule: CutRule,
    /// Slack for the vertex test and the center-in-`L` test.
    pub vertex_tol: f64,
    /// Largest allowed `‖c‖₂` of the returned ellipsoid.
    pub center_tol: f64,
    /// Recentre at the origin after every cut (valid because `L = −L`).
    pub symmetrize: bool,
    /// Total cut budget; `None` means `200·d²`.
    pub max_cuts: Option<usize>,
    pub refine: bool,
    pub refine_rounds: usize,
    /// Relative violation below which refinement stops adding points.
    pub refine_tol: f64,
    pub seed: u64,
}

impl Default for LownerConfig {
    fn default() -> Self {
        Self {
            contraction: Contraction::InvD,
            cut_rule: CutRule::Supporting,
            vertex_tol: 1e-7,
            center_tol: 1e-9,
            symmetrize: true,
            max_cuts: None,
            refine: true,
            refine_rounds: 60,
            refine_tol: 1e-3,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LownerResult {
    /// Reciprocal axis lengths, non-increasing.
    pub d: DiagMatrix,
    /// Orthogonal; columns are the axis directions matching `d`.
    pub v: DenseMatrix,
    pub iterations_central: usize,
    pub iterations_shallow: usize,
    pub refine_rounds: usize,
    /// Whether the refined ellipsoid replaced the stage-one one.
    pub refined: bool,
    /// The returned ellipsoid; `xᵀF⁻¹x = ‖DVᵀx‖₂²` when centred.
    pub ellipsoid: Ellipsoid,
    /// `ln det F` after initialisation and after every accepted update.
    pub log_det_trace: Vec<f64>,
}

/// Löwner ellipsoid of `{x : ‖Ax‖_p ≤ 1}` and its `(D, V)` factorisation
/// `F⁻¹ = V D² Vᵀ`.
pub fn lowner(a: &DenseMatrix, p: f64, cfg: &LownerConfig) -> Result<LownerResult> {
    check_p(p)?;
    let d = a.cols();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let level = LevelSet::new(a.clone(), p)?;
    let stage = ellipsoid_stage(&level, cfg)?;
    let mut trace = stage.log_det_trace;
    let mut ellipsoid = stage.ellipsoid;
    let factor = cfg.contraction.factor(d);
    let mut refined = false;
    let mut rounds = 0;

    if cfg.refine {
        let outcome = refine::refine(&level, &ellipsoid, cfg)?;
        rounds = outcome.rounds;
        let last = *trace.last().expect("trace starts non-empty");
        if let Ok(ld) = outcome.ellipsoid.log_det() {
            if ld < last && vertices_inside(&level, &outcome.ellipsoid, factor, cfg.vertex_tol)? {
                trace.push(ld);
                ellipsoid = outcome.ellipsoid;
                refined = true;
            }
        }
    }
    if !refined && stage.stalled {
        return Err(Error::NoConvergence {
            cuts: stage.central + stage.shallow,
            best: alloc::boxed::Box::new(ellipsoid),
        });
    }

    let (dvals, v) = axes_of(&ellipsoid)?;
    Ok(LownerResult {
        d: dvals,
        v,
        iterations_central: stage.central,
        iterations_shallow: stage.shallow,
        refine_rounds: rounds,
        refined,
        ellipsoid,
        log_det_trace: trace,
    })
}

/// `G = chol(F⁻¹)`, then `(D, V)` from the SVD `G = V·D·Wᵀ`, so that
/// `F⁻¹ = G Gᵀ = V D² Vᵀ`.
fn axes_of(e: &Ellipsoid) -> Result<(DiagMatrix, DenseMatrix)> {
    let f_inv = invert(&e.shape)?.symmetrized();
    let g = cholesky(&f_inv)?;
    let s = svd(&g)?;
    Ok((s.s, s.u))
}

fn vertices_inside(level: &LevelSet, e: &Ellipsoid, factor: f64, tol: f64) -> Result<bool> {
    Ok(contracted_vertices(e, factor)?
        .iter()
        .all(|v| level.gauge(v) <= 1.0 + tol))
}

struct StageOne {
    ellipsoid: Ellipsoid,
    central: usize,
    shallow: usize,
    log_det_trace: Vec<f64>,
    /// Stage one stopped before the vertex test passed: no volume-reducing
    /// cut existed, or progress stalled with refinement to follow.
    stalled: bool,
}

/// Log-det decrease over `d²` cuts below which stage one hands over to
/// the refinement.
const PLATEAU_DROP: f64 = 0.1;

fn ellipsoid_stage(level: &LevelSet, cfg: &LownerConfig) -> Result<StageOne> {
    let d = level.dim();
    let df = d as f64;
    let budget = cfg.max_cuts.unwrap_or(200 * d * d);
    let factor = cfg.contraction.factor(d);
    let shallow_depth = 1.0 / (df + 1.0);

    let mut e = level.initial_ball();
    let mut trace = vec![e.log_det()?];
    let (mut central, mut shallow) = (0usize, 0usize);

    let exhausted = |e: &Ellipsoid, cuts: usize| Error::NoConvergence {
        cuts,
        best: alloc::boxed::Box::new(e.clone()),
    };

    loop {
        while level.gauge(&e.center) > 1.0 + cfg.vertex_tol {
            if central + shallow >= budget {
                return Err(exhausted(&e, central + shallow));
            }
            let h = normalized_hyperplane(&level.subgradient(&e.center)?).0;
            e = central_cut(&e, &h)?;
            if cfg.symmetrize {
                e = recentre(&e)?;
            }
            central += 1;
            trace.push(e.log_det()?);
        }

        let vertices = contracted_vertices(&e, factor)?;
        let mut worst = 0usize;
        let mut worst_gauge = f64::NEG_INFINITY;
        for (i, v) in vertices.iter().enumerate() {
            let g = level.gauge(v);
            if g > worst_gauge {
                worst = i;
                worst_gauge = g;
            }
        }
        if worst_gauge <= 1.0 + cfg.vertex_tol {
            break;
        }
        if central + shallow >= budget {
            return Err(exhausted(&e, central + shallow));
        }

        let (h, offset) = normalized_hyperplane(&level.subgradient(&vertices[worst])?);
        let hfh = e.shape.quadratic_form(&h);
        let depth = (offset - dot(&h, &e.center)) / math::sqrt(hfh);
        if depth >= 1.0 / df - 1e-12 {
            return Ok(StageOne {
                ellipsoid: e,
                central,
                shallow,
                log_det_trace: trace,
                stalled: true,
            });
        }
        e = match cfg.cut_rule {
            CutRule::Shallow if depth <= shallow_depth => shallow_cut(&e, &h)?,
            _ => parametric_cut(&e, &h, depth.max(-1.0 + 1e-12))?,
        };
        if cfg.symmetrize {
            e = recentre(&e)?;
        }
        shallow += 1;
        trace.push(e.log_det()?);
        // with refinement to follow, a plateau is as good as convergence
        let window = d * d;
        if cfg.refine && trace.len() > window {
            let drop = trace[trace.len() - 1 - window] - trace[trace.len() - 1];
            if drop < PLATEAU_DROP {
                return Ok(StageOne {
                    ellipsoid: e,
                    central,
                    shallow,
                    log_det_trace: trace,
                    stalled: true,
                });
            }
        }
    }

    Ok(StageOne {
        ellipsoid: e,
        central,
        shallow,
        log_det_trace: trace,
        stalled: false,
    })
}

/// `H = g/‖g‖_∞` together with the offset `1/‖g‖_∞` of the supporting
/// half-space `{x : Hᵀx ≤ offset} ⊇ L`.
fn normalized_hyperplane(g: &[f64]) -> (Vec<f64>, f64) {
    let inf = g.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    (g.iter().map(|v| v / inf).collect(), 1.0 / inf)
}

/// Moves the center to the origin. Since `L = −L ⊆ E ∩ (−E)` and every
/// point of `E ∩ (−E)` has `xᵀF⁻¹x ≤ 1 − cᵀF⁻¹c`, the shape may also be
/// shrunk by that factor.
fn recentre(e: &Ellipsoid) -> Result<Ellipsoid> {
    let g = cholesky(&e.shape)?;
    let t = distance_sq_with(&g, &vec![0.0; e.dim()], &e.center);
    let shrink = if t < 1.0 - 1e-12 { 1.0 - t } else { 1.0 };
    Ok(Ellipsoid {
        center: vec![0.0; e.dim()],
        shape: e.shape.scale(shrink),
    })
}
