mod common;

use common::*;
use lplr_core::lpsvd::conditioner_distortion_bound;
use lplr_core::{
    lp_svd, lp_svd_randomized, randomized_conditioner, sandwich_check, ConditionerConfig,
    DenseMatrix, DiagMatrix, LpSvdConfig, SketchKind,
};

fn relative_reconstruction_error(a: &DenseMatrix, f: &lplr_core::LpSvd) -> f64 {
    a.sub(&f.reconstruct()).unwrap().frobenius_norm() / a.frobenius_norm()
}

fn orthogonality_defect(v: &DenseMatrix) -> f64 {
    v.tr_matmul(v)
        .max_abs_diff(&DenseMatrix::identity(v.cols()))
}

#[test]
fn orthogonal_input_at_p2() {
    // a rotation in the plane, embedded in 3-d
    let (c, s) = (0.6f64, 0.8f64);
    let a = DenseMatrix::from_rows(&[[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    let f = lp_svd(&a, 2.0, &LpSvdConfig::default()).unwrap();
    assert!(f.d.entries().iter().all(|x| (x - 1.0).abs() < 1e-3));
    assert!(orthogonality_defect(&f.u) < 1e-3);
    assert!(f.distortion >= 3f64.sqrt());
}

#[test]
fn diag_321_at_p1() {
    let a = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
    let f = lp_svd(&a, 1.0, &LpSvdConfig::default()).unwrap();
    let oracle = lowner_sigmas(&khachiyan_mvee(
        &[
            vec![1.0 / 3.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
        1e-10,
    ));
    for (got, want) in f.d.entries().iter().zip(&oracle) {
        assert!(rel_close(*got, *want, 0.05), "{:?}", f.d.entries());
    }
    for i in 0..3 {
        assert!((f.v[(i, i)].abs() - 1.0).abs() < 0.05);
        assert!((f.u[(i, i)].abs() - 1.0).abs() < 0.05);
    }
}

#[test]
fn p2_factorisation_preserves_norms() {
    let a_rows = gaussian(20, 5, 31);
    let a = from_rows(&a_rows);
    let f = lp_svd(&a, 2.0, &LpSvdConfig::default()).unwrap();
    let dvt = f.v.scale_columns(f.d.entries()).transpose();
    let mut r = rng(32);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..5).map(|_| normal(&mut r)).collect();
        let lhs = pnorm(&dvt.matvec(&x), 2.0);
        let rhs = pnorm(&mat_vec(&a_rows, &x), 2.0);
        assert!(rel_close(lhs, rhs, 0.10));
    }
}

#[test]
fn structural_invariants() {
    for (seed, p) in [(41u64, 1.0f64), (42, 1.5), (43, 2.0), (44, 3.0)] {
        let a = from_rows(&gaussian(30, 4, seed));
        for f in [
            lp_svd(&a, p, &LpSvdConfig::default()).unwrap(),
            lp_svd_randomized(&a, p, seed, &ConditionerConfig::default()).unwrap(),
        ] {
            assert!(relative_reconstruction_error(&a, &f) < 1e-8);
            assert!(f.d.is_positive_non_increasing());
            assert!(orthogonality_defect(&f.v) < 1e-8);
        }
    }
}

#[test]
fn sandwich_examples() {
    let a = from_rows(&gaussian(50, 4, 51));
    let f = lp_svd(&a, 1.0, &LpSvdConfig::default()).unwrap();
    let s = sandwich_check(&a, 1.0, &f.d, &f.v, 1000, 52);
    assert!(s.lo >= 1.0 - 1e-3, "{s:?}");
    assert!(s.hi <= 2.0 * 1.1, "{s:?}");

    let id = DiagMatrix::new(vec![1.0, 1.0]);
    let s = sandwich_check(
        &DenseMatrix::identity(2),
        1.0,
        &id,
        &DenseMatrix::identity(2),
        1000,
        1,
    );
    assert!((s.lo - 1.0).abs() < 1e-12);
    assert!((s.hi - 2f64.sqrt()).abs() < 1e-3);

    // exact p = 2 factorisation from the ordinary SVD
    let b = from_rows(&gaussian(15, 3, 53));
    let svd = lplr_core::svd(&b).unwrap();
    let s = sandwich_check(&b, 2.0, &svd.s, &svd.v, 500, 2);
    assert!((s.lo - 1.0).abs() < 1e-8 && (s.hi - 1.0).abs() < 1e-8);
}

#[test]
fn conditioner_with_identity_sketch() {
    let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
    let cfg = ConditionerConfig {
        sketch: SketchKind::Identity,
        ..ConditionerConfig::default()
    };
    let c = randomized_conditioner(&a, 2.0, 3, &cfg).unwrap();
    assert!((c.kappa_hat - 1.0).abs() < 1e-10);
    let rtr = c.r.tr_matmul(&c.r);
    assert!(rtr.max_abs_diff(&DenseMatrix::identity(2)) < 1e-10);
}

#[test]
fn conditioner_lower_side_holds_on_samples() {
    let a_rows = vec![
        vec![3.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let a = from_rows(&a_rows);
    let c = randomized_conditioner(&a, 1.0, 7, &ConditionerConfig::default()).unwrap();
    let mut r = rng(8);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..3).map(|_| normal(&mut r)).collect();
        // the rescaling used different samples, so allow the usual slack
        assert!(pnorm(&c.r.matvec(&x), 2.0) <= pnorm(&mat_vec(&a_rows, &x), 1.0) * (1.0 + 0.1));
    }
    let again = randomized_conditioner(&a, 1.0, 7, &ConditionerConfig::default()).unwrap();
    assert_eq!(c, again);
}

#[test]
fn randomized_sigmas_within_kappa_of_deterministic() {
    let a = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
    let det = lp_svd(&a, 1.0, &LpSvdConfig::default()).unwrap();
    let rnd = lp_svd_randomized(&a, 1.0, 11, &ConditionerConfig::default()).unwrap();
    let kappa = rnd.distortion;
    let slack = 3f64.sqrt() * 1.1;
    for (r, d) in rnd.d.entries().iter().zip(det.d.entries()) {
        assert!(
            *r <= d * kappa * slack && *r >= d / (kappa * slack),
            "{r} vs {d}, κ̂ = {kappa}"
        );
    }
}

#[test]
fn randomized_p2_reconstruction_with_larger_sketch() {
    let a = from_rows(&gaussian(200, 5, 61));
    let cfg = ConditionerConfig {
        sketch: SketchKind::Gaussian { rows: 100 },
        ..ConditionerConfig::default()
    };
    let f = lp_svd_randomized(&a, 2.0, 1, &cfg).unwrap();
    assert!(relative_reconstruction_error(&a, &f) < 1e-8);
}

#[test]
fn randomized_distortion_is_finite_and_bounded() {
    for (seed, p) in [(1u64, 1.0f64), (2, 1.5), (3, 2.0), (4, 3.0)] {
        let a = from_rows(&gaussian(300, 4, 70 + seed));
        let c = randomized_conditioner(&a, p, seed, &ConditionerConfig::default()).unwrap();
        assert!(c.kappa_hat.is_finite() && c.kappa_hat >= 1.0);
        assert!(c.kappa_hat <= conditioner_distortion_bound(4, 300, p));
    }
}
