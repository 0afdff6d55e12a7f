mod common;

use common::*;
use lplr_core::{
    assemble, entrywise_pnorm_pow, error_bounds, l2_low_rank, lp_low_rank, DenseMatrix,
    LowRankConfig, Method,
};

fn lp_error(a: &DenseMatrix, ak: &DenseMatrix, p: f64) -> f64 {
    entrywise_pnorm_pow(&a.sub(ak).unwrap(), p).unwrap()
}

#[test]
fn diag_321_rank_two() {
    let a = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
    let cfg = LowRankConfig::default();

    let ak = assemble(&lp_low_rank(&a, 2, 2.0, Method::LpDeterministic, &cfg).unwrap());
    assert!(ak.max_abs_diff(&DenseMatrix::from_diag(&[3.0, 2.0, 0.0])) < 1e-2);
    assert!((lp_error(&a, &ak, 2.0) - 1.0).abs() < 1e-2);

    let approx = lp_low_rank(&a, 2, 1.0, Method::LpDeterministic, &cfg).unwrap();
    let ak = assemble(&approx);
    assert!(ak.max_abs_diff(&DenseMatrix::from_diag(&[3.0, 2.0, 0.0])) < 0.05 * 3.0);
    assert!((lp_error(&a, &ak, 1.0) - 1.0).abs() < 0.05);
    assert_eq!(approx.dk.entries()[2], 0.0);
}

#[test]
fn identity_drops_exactly_one_unit_column() {
    let a = DenseMatrix::identity(3);
    for p in [1.0, 1.5, 2.0, 3.0] {
        let approx =
            lp_low_rank(&a, 2, p, Method::LpDeterministic, &LowRankConfig::default()).unwrap();
        let err = lp_error(&a, &assemble(&approx), p);
        assert!((err - 1.0).abs() < 1e-6, "p = {p}: {err}");
    }
}

#[test]
fn lower_bound_is_informational_only() {
    let a = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
    let approx = lp_low_rank(
        &a,
        2,
        1.0,
        Method::LpDeterministic,
        &LowRankConfig::default(),
    )
    .unwrap();
    let err = lp_error(&a, &assemble(&approx), 1.0);
    let b = error_bounds(&approx.sigmas, 2, 1.0, 3, 3, Method::LpDeterministic).unwrap();
    assert!(
        err < b.lower,
        "error {err} vs stated lower bound {}",
        b.lower
    );
    assert!(b.lower_informational);
    assert!(err <= b.upper);
}

#[test]
fn l2_residual_is_the_tail_sum() {
    let a = from_rows(&gaussian(12, 5, 3));
    let s = lplr_core::svd(&a).unwrap();
    let sig = s.s.entries();
    for k in 1..5 {
        let ak = assemble(&l2_low_rank(&a, k).unwrap());
        let res = lp_error(&a, &ak, 2.0);
        let tail: f64 = sig[k..].iter().map(|v| v * v).sum();
        assert!(rel_close(res, tail, 1e-8), "k = {k}");
    }
}

#[test]
fn l2_never_beaten_by_random_projections() {
    let rows = gaussian(30, 6, 17);
    let a = from_rows(&rows);
    let best = lp_error(&a, &assemble(&l2_low_rank(&a, 3).unwrap()), 2.0);
    for trial in 0..10_000u64 {
        let q = orthonormal_columns(&gaussian(6, 3, 1_000 + trial));
        let proj = mul(&mul(&rows, &q), &transpose(&q));
        let res: f64 = rows
            .iter()
            .flatten()
            .zip(proj.iter().flatten())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        assert!(res >= best * (1.0 - 1e-10), "trial {trial}: {res} < {best}");
    }
}

#[test]
fn assemble_matches_triple_product() {
    let a = from_rows(&gaussian(25, 5, 23));
    for method in [Method::LpDeterministic, Method::LpRandomized, Method::L2Svd] {
        let approx = lp_low_rank(&a, 2, 1.5, method, &LowRankConfig::default()).unwrap();
        let direct = approx.triple_product();
        assert!(assemble(&approx).max_abs_diff(&direct) < 1e-8 * direct.max_abs().max(1.0));
        assert_eq!(approx.left.shape(), (25, 2));
        assert_eq!(approx.right.shape(), (2, 5));
    }
}

#[test]
fn upper_bound_and_per_column_bounds() {
    for (seed, p) in [(1u64, 1.0f64), (2, 1.5), (3, 2.0)] {
        let a = from_rows(&gaussian(40, 5, 300 + seed));
        let approx0 =
            lp_low_rank(&a, 1, p, Method::LpDeterministic, &LowRankConfig::default()).unwrap();
        let d = 5.0f64;
        for k in 1..5 {
            let approx = lplr_core::RankKApprox::truncate(
                &approx0.u,
                &approx0.sigmas,
                &approx0.v,
                k,
                Method::LpDeterministic,
                p,
                approx0.distortion,
                false,
            )
            .unwrap();
            let diff = a.sub(&assemble(&approx)).unwrap();
            let err = entrywise_pnorm_pow(&diff, p).unwrap();
            let b = error_bounds(&approx.sigmas, k, p, 5, 40, Method::LpDeterministic).unwrap();
            assert!(err <= 1.1f64.powf(p) * b.upper, "k = {k}, p = {p}");
            let sk1 = approx.sigmas[k];
            for j in 0..5 {
                let col: f64 = diff.column(j).iter().map(|v| v.abs().powf(p)).sum();
                assert!(col <= 1.1f64.powf(p) * d.powf(p / 2.0) * sk1.powf(p) * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn residual_non_increasing_in_k() {
    let a = from_rows(&gaussian(30, 6, 401));
    let base = lp_low_rank(
        &a,
        1,
        1.0,
        Method::LpDeterministic,
        &LowRankConfig::default(),
    )
    .unwrap();
    let mut last = f64::INFINITY;
    for k in 1..6 {
        let approx = lplr_core::RankKApprox::truncate(
            &base.u,
            &base.sigmas,
            &base.v,
            k,
            Method::LpDeterministic,
            1.0,
            base.distortion,
            false,
        )
        .unwrap();
        let err = lp_error(&a, &assemble(&approx), 1.0);
        assert!(err <= last * (1.0 + 1e-9), "k = {k}");
        last = err;
    }
}

#[test]
fn transpose_consistency() {
    let a = from_rows(&gaussian(6, 14, 501));
    let at = a.transpose();
    for method in [Method::LpDeterministic, Method::L2Svd] {
        let x = lp_low_rank(&a, 3, 1.0, method, &LowRankConfig::default()).unwrap();
        let y = lp_low_rank(&at, 3, 1.0, method, &LowRankConfig::default()).unwrap();
        assert!(x.transposed && !y.transposed);
        let ex = lp_error(&a, &assemble(&x), 1.0);
        let ey = lp_error(&at, &assemble(&y), 1.0);
        assert!(rel_close(ex, ey, 1e-8), "{ex} vs {ey}");
    }
}

#[test]
fn p2_deterministic_close_to_svd() {
    let a = from_rows(&gaussian(40, 6, 601));
    for k in 1..6 {
        let det = lp_low_rank(
            &a,
            k,
            2.0,
            Method::LpDeterministic,
            &LowRankConfig::default(),
        )
        .unwrap();
        let svd = l2_low_rank(&a, k).unwrap();
        let e_det = lp_error(&a, &assemble(&det), 2.0);
        let e_svd = lp_error(&a, &assemble(&svd), 2.0);
        assert!(e_det <= 1.1 * e_svd, "k = {k}: {e_det} vs {e_svd}");
    }
}

#[test]
fn invalid_rank_is_rejected() {
    let a = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
    for k in [0, 3, 7] {
        assert!(matches!(
            lp_low_rank(
                &a,
                k,
                1.0,
                Method::LpDeterministic,
                &LowRankConfig::default()
            ),
            Err(lplr_core::Error::InvalidRank { .. })
        ));
        assert!(l2_low_rank(&a, k).is_err());
    }
}
