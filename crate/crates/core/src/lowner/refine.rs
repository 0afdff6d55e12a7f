//! Second stage: minimum-volume origin-centred ellipsoid through boundary
//! points of `L`.
//!
//! Work happens in coordinates whitened by the stage-one ellipsoid
//! (`x = T y` with `F = T Tᵀ`), where `L` sits inside the unit ball and is
//! reasonably round. We keep a finite set `P` of boundary points of `L` and
//! alternate two steps:
//!
//! * solve the D-optimal design on `P` (maximise `ln det Σ w_j p_j p_jᵀ`
//!   over the simplex) with Frank–Wolfe add/drop steps; the ellipsoid
//!   `{y : yᵀ(dΣ)⁻¹y ≤ 1}` is then the smallest centred ellipsoid holding
//!   `±P`;
//! * search for boundary points outside it by projected gradient ascent of
//!   `ψ(y) = yᵀMy / ‖By‖_p²` on the sphere, and add them to `P`.
//!
//! When no violating point is found the ellipsoid is scaled by the largest
//! `ψ` observed so it covers every point examined.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{Ellipsoid, LevelSet, LownerConfig};
use crate::decomp::{cholesky, invert};
use crate::error::Result;
use crate::math;
use crate::matrix::{dot, norm2, vector_pnorm, DenseMatrix};
use crate::rng::{self, streams};

pub(super) struct Outcome {
    pub ellipsoid: Ellipsoid,
    pub rounds: usize,
}

const DESIGN_MAX_ITERS: usize = 50_000;
const ASCENT_MAX_ITERS: usize = 60;
const FINAL_PROBES: usize = 2048;
const FINAL_ASCENTS: usize = 64;

struct Whitened {
    b: DenseMatrix,
    t: DenseMatrix,
    p: f64,
}

impl Whitened {
    fn gauge(&self, y: &[f64]) -> f64 {
        vector_pnorm(&self.b.matvec(y), self.p)
    }

    /// Scales `y` onto the boundary of `L`.
    fn to_boundary(&self, y: &[f64]) -> Option<Vec<f64>> {
        let g = self.gauge(y);
        (g > 0.0 && g.is_finite()).then(|| y.iter().map(|v| v / g).collect())
    }
}

pub(super) fn refine(level: &LevelSet, start: &Ellipsoid, cfg: &LownerConfig) -> Result<Outcome> {
    let d = level.dim();
    let t = cholesky(&start.shape)?;
    let w = Whitened {
        b: level.matrix().matmul(&t),
        t,
        p: level.p(),
    };
    let mut rng = rng::seeded(cfg.seed, streams::REFINE);

    let mut points: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = alloc::vec![0.0; d];
        e[i] = 1.0;
        push_point(&mut points, &w, &e);
    }
    for _ in 0..4 * d {
        let g = rng::gaussian_vector(&mut rng, d);
        push_point(&mut points, &w, &g);
    }

    let mut weights: Vec<f64> = Vec::new();
    let mut rounds = 0;
    let mut sigma_inv;
    // early rounds run at a loose tolerance, tightened when they go quiet
    let mut tol = cfg.refine_tol.max(1e-2);
    loop {
        rounds += 1;
        weights.resize(points.len(), 0.0);
        let design = solve_design(&points, &weights, 0.1 * tol)?;
        weights = design.weights;
        sigma_inv = design.sigma_inv;
        prune(&mut points, &mut weights, &sigma_inv);
        if rounds > cfg.refine_rounds {
            break;
        }

        let psi = Psi::new(&w, &sigma_inv, d);
        let mut starts: Vec<Vec<f64>> = support_points(&points, &weights, d);
        for _ in 0..d {
            starts.push(rng::gaussian_vector(&mut rng, d));
        }
        let mut added = 0;
        let mut best = 0.0f64;
        for s in starts {
            let (y, val) = psi.ascend(&s);
            best = best.max(val);
            if val > 1.0 + tol && push_point(&mut points, &w, &y) {
                added += 1;
            }
        }
        // at the final level, a handful of marginal violators is not worth
        // another round: the closing ψ scaling absorbs them
        if tol <= cfg.refine_tol && best <= 1.0 + 3.0 * tol {
            break;
        }
        if added == 0 {
            if tol <= cfg.refine_tol {
                break;
            }
            tol = (0.1 * tol).max(cfg.refine_tol);
        }
    }

    weights.resize(points.len(), 0.0);

    // Cover every point examined: the design points, fresh probes, and
    // local maxima reached from the most promising probes.
    let psi = Psi::new(&w, &sigma_inv, d);
    let mut worst = points.iter().map(|y| psi.eval(y)).fold(0.0f64, f64::max);
    let mut probes: Vec<(f64, Vec<f64>)> = (0..FINAL_PROBES)
        .map(|_| {
            let g = rng::gaussian_vector(&mut rng, d);
            (psi.eval(&g), g)
        })
        .collect();
    probes.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    worst = worst.max(probes.first().map_or(0.0, |p| p.0));
    let mut ascents: Vec<Vec<f64>> = probes
        .into_iter()
        .take(FINAL_ASCENTS)
        .map(|p| p.1)
        .collect();
    ascents.extend(support_points(&points, &weights, 4 * d));
    ascents.shuffle(&mut rng);
    for s in &ascents {
        worst = worst.max(psi.ascend(s).1);
    }

    // F_y = ψ_max · d · Σ, mapped back with x = T y.
    let sigma = invert(&sigma_inv)?.symmetrized();
    let f_y = sigma.scale(worst * d as f64);
    let f_x = w.t.matmul(&f_y).matmul(&w.t.transpose()).symmetrized();
    Ok(Outcome {
        ellipsoid: Ellipsoid {
            center: alloc::vec![0.0; d],
            shape: f_x,
        },
        rounds,
    })
}

/// Adds the boundary point along `y` unless it (or its negative) is
/// already present.
fn push_point(points: &mut Vec<Vec<f64>>, w: &Whitened, y: &[f64]) -> bool {
    let Some(bp) = w.to_boundary(y) else {
        return false;
    };
    let n_bp = norm2(&bp);
    let dup = points.iter().any(|q| {
        let c = dot(q, &bp) / (norm2(q) * n_bp);
        math::abs(c) > 1.0 - 1e-12
    });
    if !dup {
        points.push(bp);
    }
    !dup
}

/// Drops points that cannot support the optimal design of the current set
/// (Harman–Pronzato bound: `g_i < d·h(ε)` with `ε = max_j g_j / d − 1`).
fn prune(points: &mut Vec<Vec<f64>>, weights: &mut Vec<f64>, sigma_inv: &DenseMatrix) {
    let d = sigma_inv.rows() as f64;
    let g: Vec<f64> = points.iter().map(|p| sigma_inv.quadratic_form(p)).collect();
    let eps = (g.iter().cloned().fold(0.0, f64::max) / d - 1.0).max(0.0);
    let h = 1.0 + eps / 2.0 - math::sqrt(eps * (4.0 + eps - 4.0 / d)) / 2.0;
    let keep: Vec<bool> = g
        .iter()
        .zip(weights.iter())
        .map(|(&gi, &wi)| wi > 0.0 || gi >= d * h)
        .collect();
    let mut i = 0;
    points.retain(|_| {
        i += 1;
        keep[i - 1]
    });
    let mut i = 0;
    weights.retain(|_| {
        i += 1;
        keep[i - 1]
    });
}

fn support_points(points: &[Vec<f64>], weights: &[f64], limit: usize) -> Vec<Vec<f64>> {
    let mut idx: Vec<usize> = (0..points.len()).filter(|&i| weights[i] > 0.0).collect();
    idx.sort_by(|&a, &b| {
        weights[b]
            .partial_cmp(&weights[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    idx.into_iter()
        .take(limit)
        .map(|i| points[i].clone())
        .collect()
}

struct Design {
    weights: Vec<f64>,
    sigma_inv: DenseMatrix,
}

fn moment_inverse(points: &[Vec<f64>], weights: &[f64]) -> Result<DenseMatrix> {
    let d = points[0].len();
    let mut sigma = DenseMatrix::zeros(d, d);
    for (p, &wt) in points.iter().zip(weights) {
        if wt == 0.0 {
            continue;
        }
        for i in 0..d {
            for j in 0..d {
                sigma[(i, j)] += wt * p[i] * p[j];
            }
        }
    }
    Ok(invert(&sigma)?.symmetrized())
}

/// D-optimal design on `points` by pairwise exchanges: weight moves from
/// the least to the most loaded point with the exact line-search step. A
/// zero weight vector restarts from uniform weights; new points of a warm
/// start enter with a small share so `Σ` stays well conditioned.
fn solve_design(points: &[Vec<f64>], warm: &[f64], tol: f64) -> Result<Design> {
    let m = points.len();
    let d = points[0].len();
    let df = d as f64;
    let mut w: Vec<f64> = if warm.iter().sum::<f64>() > 0.5 {
        let fresh = warm.iter().filter(|&&x| x == 0.0).count() as f64;
        let eps = 1e-3 / fresh.max(1.0);
        let mut w: Vec<f64> = warm
            .iter()
            .map(|&x| if x == 0.0 { eps } else { x })
            .collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    } else {
        alloc::vec![1.0 / m as f64; m]
    };

    let mut sigma_inv = moment_inverse(points, &w)?;
    let mut g: Vec<f64> = points.iter().map(|p| sigma_inv.quadratic_form(p)).collect();

    for iter in 0..DESIGN_MAX_ITERS {
        if iter > 0 && iter % 500 == 0 {
            sigma_inv = moment_inverse(points, &w)?;
            for (gi, p) in g.iter_mut().zip(points) {
                *gi = sigma_inv.quadratic_form(p);
            }
        }
        let (mut up, mut down) = (0usize, usize::MAX);
        for i in 0..m {
            if g[i] > g[up] {
                up = i;
            }
            if w[i] > 0.0 && (down == usize::MAX || g[i] < g[down]) {
                down = i;
            }
        }
        if g[up] / df - 1.0 <= tol && 1.0 - g[down] / df <= tol {
            break;
        }
        if up == down {
            break;
        }

        // moving α from `down` to `up` multiplies det Σ by
        // (1 + α g_u)(1 − α g_d) + α² g_ud²
        let su = sigma_inv.matvec(&points[up]);
        let gud = dot(&su, &points[down]);
        let (gu, gd) = (g[up], g[down]);
        let curv = gu * gd - gud * gud;
        let mut alpha = if curv > 0.0 {
            (gu - gd) / (2.0 * curv)
        } else {
            w[down]
        };
        alpha = alpha.min(w[down]);
        if !(alpha > 0.0) {
            break;
        }

        // Σ' = Σ + α(x_u x_uᵀ − x_d x_dᵀ), two Sherman–Morrison updates
        let ku = alpha / (1.0 + alpha * gu);
        rank_one(&mut sigma_inv, &su, -ku);
        let t = sigma_inv.matvec(&points[down]);
        let q = dot(&t, &points[down]);
        let denom = 1.0 - alpha * q;
        if !(denom > 1e-12) {
            // dropping x_d would make Σ singular; Σ⁻¹ is rebuilt below
            break;
        }
        let kd = alpha / denom;
        rank_one(&mut sigma_inv, &t, kd);
        for (gi, p) in g.iter_mut().zip(points) {
            let a = dot(&su, p);
            let b = dot(&t, p);
            *gi = *gi - ku * a * a + kd * b * b;
        }
        w[up] += alpha;
        w[down] -= alpha;
        if w[down] < 1e-14 {
            w[down] = 0.0;
        }
    }
    let sigma_inv = moment_inverse(points, &w)?;
    Ok(Design {
        weights: w,
        sigma_inv,
    })
}

/// `S += k·v vᵀ`.
fn rank_one(s: &mut DenseMatrix, v: &[f64], k: f64) {
    let d = v.len();
    for r in 0..d {
        for c in 0..d {
            s[(r, c)] += k * v[r] * v[c];
        }
    }
}

/// `ψ(y) = yᵀ(dΣ)⁻¹y / ‖By‖_p²`; values above one mark points of `L`
/// outside the current ellipsoid.
struct Psi<'a> {
    w: &'a Whitened,
    m: DenseMatrix,
}

impl<'a> Psi<'a> {
    fn new(w: &'a Whitened, sigma_inv: &DenseMatrix, d: usize) -> Self {
        Self {
            w,
            m: sigma_inv.scale(1.0 / d as f64),
        }
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let g = self.w.gauge(y);
        if g == 0.0 {
            return 0.0;
        }
        self.m.quadratic_form(y) / (g * g)
    }

    /// Backtracking ascent along great circles of the unit sphere.
    fn ascend(&self, start: &[f64]) -> (Vec<f64>, f64) {
        let mut y = normalized(start);
        let mut val = self.eval(&y);
        let mut step = 0.25;
        for _ in 0..ASCENT_MAX_ITERS {
            let Some(dir) = self.ascent_direction(&y, val) else {
                break;
            };
            let mut moved = false;
            while step > 1e-10 {
                let cand = normalized(
                    &y.iter()
                        .zip(&dir)
                        .map(|(a, b)| a + step * b)
                        .collect::<Vec<_>>(),
                );
                let cv = self.eval(&cand);
                if cv > val {
                    let gain = cv - val;
                    y = cand;
                    val = cv;
                    step = (2.0 * step).min(1.0);
                    moved = gain > 1e-15 * val;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        (y, val)
    }

    fn ascent_direction(&self, y: &[f64], val: f64) -> Option<Vec<f64>> {
        let r = self.w.b.matvec(y);
        let n = vector_pnorm(&r, self.w.p);
        if n == 0.0 {
            return None;
        }
        let p = self.w.p;
        let weights: Vec<f64> = r
            .iter()
            .map(|&v| {
                let s = if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                if p == 1.0 {
                    s
                } else {
                    s * math::abs_pow(v / n, p - 1.0)
                }
            })
            .collect();
        let dn = self.w.b.tr_matvec(&weights);
        let my = self.m.matvec(y);
        let mut grad: Vec<f64> = my
            .iter()
            .zip(&dn)
            .map(|(a, b)| 2.0 * a / (n * n) - 2.0 * val * b / n)
            .collect();
        let radial = dot(&grad, y);
        grad.iter_mut()
            .zip(y)
            .for_each(|(gi, yi)| *gi -= radial * yi);
        let gn = norm2(&grad);
        (gn > 0.0 && gn.is_finite()).then(|| grad.iter().map(|v| v / gn).collect())
    }
}

fn normalized(y: &[f64]) -> Vec<f64> {
    let n = norm2(y);
    y.iter().map(|v| v / n).collect()
}
