//! Reference computations for the integration tests, written without the
//! crate's own decompositions.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal by Box–Muller, kept separate from the crate's sampler.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Mat {
    let mut r = rng(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| normal(&mut r)).collect())
        .collect()
}

pub fn identity(d: usize) -> Mat {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

pub fn pnorm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        let pv = m[col][col];
        assert!(pv.abs() > 1e-300, "singular matrix in oracle");
        for v in m[col].iter_mut() {
            *v /= pv;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    m.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix by cyclic
/// Jacobi rotations. Eigenvalues are sorted in decreasing order.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = identity(n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[y][y].partial_cmp(&m[x][x]).unwrap());
    let vals = order.iter().map(|&i| m[i][i]).collect();
    let vecs = (0..n)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (vals, vecs)
}

/// Minimum-volume origin-centred ellipsoid containing `±points`
/// (Khachiyan's algorithm). Returns `M` with `E = {x : xᵀ M x ≤ 1}`.
pub fn khachiyan_mvee(points: &[Vec<f64>], tol: f64) -> Mat {
    let d = points[0].len();
    let m = points.len();
    let mut u = vec![1.0 / m as f64; m];
    let moment = |u: &[f64]| -> Mat {
        let mut x = vec![vec![0.0; d]; d];
        for (q, w) in points.iter().zip(u) {
            for i in 0..d {
                for j in 0..d {
                    x[i][j] += w * q[i] * q[j];
                }
            }
        }
        x
    };
    for _ in 0..200_000 {
        let x_inv = inverse(&moment(&u));
        let g: Vec<f64> = points
            .iter()
            .map(|q| {
                let t = mat_vec(&x_inv, q);
                q.iter().zip(&t).map(|(a, b)| a * b).sum()
            })
            .collect();
        let (j, gmax) = g
            .iter()
            .cloned()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if gmax <= d as f64 * (1.0 + tol) {
            break;
        }
        let step = (gmax - d as f64) / (d as f64 * (gmax - 1.0));
        for w in u.iter_mut() {
            *w *= 1.0 - step;
        }
        u[j] += step;
    }
    let x_inv = inverse(&moment(&u));
    x_inv
        .into_iter()
        .map(|row| row.into_iter().map(|v| v / d as f64).collect())
        .collect()
}

/// Semi-axis lengths of `{x : xᵀ M x ≤ 1}` in decreasing order.
pub fn semi_axes(m: &Mat) -> Vec<f64> {
    let (vals, _) = sym_eigen(m);
    let mut axes: Vec<f64> = vals.iter().map(|l| 1.0 / l.sqrt()).collect();
    axes.sort_by(|a, b| b.partial_cmp(a).unwrap());
    axes
}

/// The Löwner "singular values": reciprocals of the semi-axes, decreasing.
pub fn lowner_sigmas(m: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = semi_axes(m).iter().map(|a| 1.0 / a).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Orthonormal basis of the span of the columns of `a` (`n × k`) by
/// modified Gram–Schmidt.
pub fn orthonormal_columns(a: &Mat) -> Mat {
    let n = a.len();
    let k = a[0].len();
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| (0..n).map(|i| a[i][j]).collect()).collect();
    for j in 0..k {
        for i in 0..j {
            let dotp: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
            let ci = cols[i].clone();
            for (x, y) in cols[j].iter_mut().zip(&ci) {
                *x -= dotp * y;
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    (0..n)
        .map(|i| (0..k).map(|j| cols[j][i]).collect())
        .collect()
}

pub fn to_rows(m: &lplr_core::DenseMatrix) -> Mat {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn from_rows(m: &Mat) -> lplr_core::DenseMatrix {
    lplr_core::DenseMatrix::from_rows(m).unwrap()
}

/// A random point on the boundary of `{x : ‖Ax‖_p ≤ 1}`.
pub fn boundary_point(a: &Mat, p: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let x: Vec<f64> = (0..a[0].len()).map(|_| normal(rng)).collect();
    let g = pnorm(&mat_vec(a, &x), p);
    x.iter().map(|v| v / g).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}
