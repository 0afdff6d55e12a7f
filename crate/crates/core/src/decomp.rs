//! Dense decompositions: one-sided Jacobi SVD, Householder QR, Cholesky and
//! SVD-based inversion.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{dot, norm2, DenseMatrix, DiagMatrix};

/// Sweep cap for the Jacobi SVD.
pub const SVD_MAX_SWEEPS: usize = 100;
/// Relative off-diagonal tolerance `|wᵢ·wⱼ| ≤ tol·‖wᵢ‖‖wⱼ‖`.
pub const SVD_TOLERANCE: f64 = 1e-12;
/// Default condition-number cap used by [`invert`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Thin SVD `A = U·S·Vᵀ` with singular values sorted non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: DiagMatrix,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u
            .scale_columns(self.s.entries())
            .matmul(&self.v.transpose())
    }
}

/// Thin SVD of `a`.
///
/// Tall inputs are first reduced by a Householder QR so the Jacobi sweeps run
/// on the `cols × cols` triangular factor. Wide inputs are handled through
/// the transpose.
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    if m > n {
        let (q, r) = householder_qr(a);
        let inner = jacobi_svd(&r)?;
        return Ok(Svd {
            u: q.matmul(&inner.u),
            s: inner.s,
            v: inner.v,
        });
    }
    jacobi_svd(a)
}

fn jacobi_svd(a: &DenseMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        // columns at rounding-noise level relative to the largest one carry
        // no information and would never satisfy the relative test
        let floor =
            w.iter().map(|c| dot(c, c)).fold(0.0f64, f64::max) * (f64::EPSILON * f64::EPSILON);
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                let gamma = dot(&w[i], &w[j]);
                if gamma == 0.0
                    || alpha <= floor
                    || beta <= floor
                    || math::abs(gamma) <= SVD_TOLERANCE * math::sqrt(alpha * beta)
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (math::abs(zeta) + math::hypot(1.0, zeta));
                let c = 1.0 / math::hypot(1.0, t);
                let s = c * t;
                rotate(&mut w, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdFailure {
            sweeps: SVD_MAX_SWEEPS,
        });
    }

    let sigma: Vec<f64> = w.iter().map(|col| norm2(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal values keep their original index order
    order.sort_by(|&x, &y| {
        sigma[y]
            .partial_cmp(&sigma[x])
            .unwrap_or(core::cmp::Ordering::Equal)
    });

    let s_max = order.first().map_or(0.0, |&i| sigma[i]);
    let negligible = s_max * f64::EPSILON * (m.max(n) as f64);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &idx) in order.iter().enumerate() {
        if sigma[idx] > negligible && sigma[idx] > 0.0 {
            u_cols.push(w[idx].iter().map(|x| x / sigma[idx]).collect());
        } else {
            u_cols.push(vec![0.0; m]);
            pending.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &pending);

    let s = DiagMatrix::new(order.iter().map(|&i| sigma[i]).collect());
    let u = DenseMatrix::from_columns(&u_cols);
    let v_sorted: Vec<Vec<f64>> = order.iter().map(|&i| v[i].clone()).collect();
    Ok(Svd {
        u,
        s,
        v: DenseMatrix::from_columns(&v_sorted),
    })
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to all other
/// columns, using Gram–Schmidt against the standard basis.
fn complete_orthonormal(cols: &mut [Vec<f64>], pending: &[usize]) {
    if pending.is_empty() {
        return;
    }
    let m = cols[0].len();
    let mut basis = 0;
    for &slot in pending {
        while basis < m {
            let mut cand = vec![0.0; m];
            cand[basis] = 1.0;
            basis += 1;
            for _ in 0..2 {
                for (k, other) in cols.iter().enumerate() {
                    if k == slot {
                        continue;
                    }
                    let proj = dot(&cand, other);
                    for (c, o) in cand.iter_mut().zip(other) {
                        *c -= proj * o;
                    }
                }
            }
            let nrm = norm2(&cand);
            if nrm > 1e-8 {
                cols[slot] = cand.iter().map(|c| c / nrm).collect();
                break;
            }
        }
    }
}

/// Householder QR without rank checks; `R` gets a non-negative diagonal.
fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut x: Vec<f64> = (k..m).map(|i| w[(i, k)]).collect();
        let norm = norm2(&x);
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        x[0] -= alpha;
        let vnorm2 = dot(&x, &x);
        if vnorm2 == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        for j in k..n {
            let mut proj = 0.0;
            for (t, i) in (k..m).enumerate() {
                proj += x[t] * w[(i, j)];
            }
            let f = 2.0 * proj / vnorm2;
            for (t, i) in (k..m).enumerate() {
                w[(i, j)] -= f * x[t];
            }
        }
        reflectors.push(x);
    }

    let mut q = DenseMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        let vnorm2 = dot(v, v);
        for j in 0..n {
            let mut proj = 0.0;
            for (t, i) in (k..m).enumerate() {
                proj += v[t] * q[(i, j)];
            }
            let f = 2.0 * proj / vnorm2;
            for (t, i) in (k..m).enumerate() {
                q[(i, j)] -= f * v[t];
            }
        }
    }
    let mut r = DenseMatrix::from_fn(n, n, |i, j| if j >= i { w[(i, j)] } else { 0.0 });
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for j in k..n {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    (q, r)
}

/// Thin QR `A = Q·R` for `rows ≥ cols`, with `R` upper triangular and a
/// non-negative diagonal.
pub fn qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            got: (m, n),
        });
    }
    let (q, r) = householder_qr(a);
    let floor = 1e-12 * a.frobenius_norm();
    if (0..n).any(|k| r[(k, k)] <= floor) {
        return Err(Error::RankDeficient);
    }
    Ok((q, r))
}

/// Lower-triangular `G` with `G·Gᵀ = F`.
///
/// `F` is symmetrised as `(F + Fᵀ)/2` first; asymmetry beyond `1e-12`
/// relative to the largest entry is rejected.
pub fn cholesky(f: &DenseMatrix) -> Result<DenseMatrix> {
    let n = f.rows();
    if !f.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            got: f.shape(),
        });
    }
    let asym = f.max_asymmetry();
    if asym > 1e-12 * f.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let s = f.symmetrized();
    let mut g = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= g[(j, k)] * g[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let gjj = math::sqrt(d);
        g[(j, j)] = gjj;
        for i in (j + 1)..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= g[(i, k)] * g[(j, k)];
            }
            g[(i, j)] = v / gjj;
        }
    }
    Ok(g)
}

/// Solves `G·Gᵀ·x = b` given the Cholesky factor `G`.
pub fn cholesky_solve(g: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = g.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut v = y[i];
        for k in 0..i {
            v -= g[(i, k)] * y[k];
        }
        y[i] = v / g[(i, i)];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= g[(k, i)] * y[k];
        }
        y[i] = v / g[(i, i)];
    }
    y
}

/// `ln det(G·Gᵀ)` from a Cholesky factor.
pub fn cholesky_log_det(g: &DenseMatrix) -> f64 {
    2.0 * g.diagonal().iter().map(|v| math::ln(*v)).sum::<f64>()
}

/// Inverse of a square matrix with the default condition cap `1e12`.
pub fn invert(m: &DenseMatrix) -> Result<DenseMatrix> {
    invert_with_cap(m, DEFAULT_CONDITION_CAP)
}

/// Inverse via the SVD, `M⁻¹ = V·S⁻¹·Uᵀ`, refusing matrices whose condition
/// number exceeds `cap`.
pub fn invert_with_cap(m: &DenseMatrix, cap: f64) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (m.rows(), m.rows()),
            got: m.shape(),
        });
    }
    let dec = svd(m)?;
    let s = dec.s.entries();
    let (s_max, s_min) = (s[0], s[s.len() - 1]);
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    if !(condition <= cap) {
        return Err(Error::SingularMatrix { condition });
    }
    let inv_s: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    Ok(dec.v.scale_columns(&inv_s).matmul(&dec.u.transpose()))
}

/// Eigen-decomposition `F = Q·diag(λ)·Qᵀ` of a symmetric positive definite
/// matrix, read off its SVD. Eigenvalues come back non-increasing.
pub fn spd_eigen(f: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let dec = svd(&f.symmetrized())?;
    Ok((dec.s.entries().to_vec(), dec.v))
}
