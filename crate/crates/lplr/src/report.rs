//! Evaluation reports: reconstruction error, the ℓ2 baseline, bounds and the
//! sandwich check for one rank-k approximation.

use lplr_core::{
    assemble, entrywise_pnorm_pow, error_bounds, l2_low_rank, orient, sandwich_check, DenseMatrix,
    DiagMatrix, Method, RankKApprox,
};
use serde::{Deserialize, Serialize};

/// Random directions used by the sandwich check in reports.
pub const SANDWICH_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("k = {k} gives k(n+d) >= nd for n = {n}, d = {d}: the factors are not smaller")]
    NotCompressing { n: usize, d: usize, k: usize },
    #[error(transparent)]
    Core(#[from] lplr_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IterationCounts {
    pub central: usize,
    pub shallow: usize,
    pub refine_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub p: f64,
    #[serde(with = "method_name")]
    pub method: Method,
    pub error_pp: f64,
    pub error_l2_baseline: f64,
    pub bound_lower: f64,
    pub bound_upper: f64,
    /// The upper bound with `σ_k` in place of `σ_{k+1}`.
    pub bound_upper_stated: f64,
    pub sandwich_lo: f64,
    pub sandwich_hi: f64,
    /// `1 − k(n+d)/(nd)`; negative when the factors are larger than `A`.
    pub compression_rate: f64,
    pub iterations: IterationCounts,
    pub wall_time_ms: f64,
    pub seed: u64,
}

pub fn parse_method(name: &str) -> Option<Method> {
    [Method::LpDeterministic, Method::LpRandomized, Method::L2Svd]
        .into_iter()
        .find(|m| m.name() == name)
}

mod method_name {
    use lplr_core::Method;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Method, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(m.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Method, D::Error> {
        let name = String::deserialize(d)?;
        super::parse_method(&name)
            .ok_or_else(|| D::Error::custom(format!("unknown method {name:?}")))
    }
}

fn raw_rate(n: usize, d: usize, k: usize) -> f64 {
    1.0 - (k as f64 * (n + d) as f64) / (n as f64 * d as f64)
}

/// Fraction of storage saved by keeping `n×k` and `k×d` factors instead of
/// the `n×d` matrix.
pub fn compression_rate(n: usize, d: usize, k: usize) -> Result<f64, ReportError> {
    let max = n.min(d).saturating_sub(1);
    if k == 0 || k > max {
        return Err(lplr_core::Error::InvalidRank { k, max }.into());
    }
    if k as u128 * (n + d) as u128 >= n as u128 * d as u128 {
        return Err(ReportError::NotCompressing { n, d, k });
    }
    Ok(raw_rate(n, d, k))
}

/// Scores `approx` against `a`. `wall_time_ms` and `seed` are left at zero
/// for the caller to fill in.
pub fn evaluate(a: &DenseMatrix, approx: &RankKApprox, p: f64) -> Result<EvalReport, ReportError> {
    let ak = assemble(approx);
    if ak.shape() != a.shape() {
        return Err(lplr_core::Error::ShapeMismatch {
            expected: a.shape(),
            got: ak.shape(),
        }
        .into());
    }
    let (oriented, _) = orient(a);
    let (n, d) = oriented.shape();
    let k = approx.k;
    let error_pp = entrywise_pnorm_pow(&a.sub(&ak)?, p)?;
    let baseline = assemble(&l2_low_rank(a, k)?);
    let error_l2_baseline = entrywise_pnorm_pow(&a.sub(&baseline)?, p)?;
    let bounds = error_bounds(&approx.sigmas, k, p, d, n, approx.method)?;
    let s = sandwich_check(
        &oriented,
        p,
        &DiagMatrix::new(approx.sigmas.clone()),
        &approx.v,
        SANDWICH_SAMPLES,
        0,
    );
    Ok(EvalReport {
        n: a.rows(),
        d: a.cols(),
        k,
        p,
        method: approx.method,
        error_pp,
        error_l2_baseline,
        bound_lower: bounds.lower,
        bound_upper: bounds.upper,
        bound_upper_stated: bounds.upper_stated,
        sandwich_lo: s.lo,
        sandwich_hi: s.hi,
        compression_rate: raw_rate(a.rows(), a.cols(), k),
        iterations: IterationCounts {
            central: approx.iterations.central,
            shallow: approx.iterations.shallow,
            refine_rounds: approx.iterations.refine_rounds,
        },
        wall_time_ms: 0.0,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compression_examples() {
        assert_eq!(
            compression_rate(100, 100, 50),
            Err(ReportError::NotCompressing {
                n: 100,
                d: 100,
                k: 50
            })
        );
        assert_eq!(raw_rate(100, 100, 50), 0.0);
        let r = compression_rate(30522, 768, 384).unwrap();
        assert!((r - (1.0 - 384.0 * 31290.0 / (30522.0 * 768.0))).abs() < 1e-15);
        assert!((r - 0.4874).abs() < 1e-4);
        assert!((compression_rate(30522, 768, 637).unwrap() - 0.1497).abs() < 1e-4);
        assert!(matches!(
            compression_rate(10, 5, 0),
            Err(ReportError::Core(_))
        ));
        assert!(matches!(
            compression_rate(10, 5, 5),
            Err(ReportError::Core(_))
        ));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::LpDeterministic, Method::LpRandomized, Method::L2Svd] {
            assert_eq!(parse_method(m.name()), Some(m));
        }
        assert_eq!(parse_method("pca"), None);
    }
}
