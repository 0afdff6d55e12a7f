use alloc::boxed::Box;

use crate::lowner::Ellipsoid;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("p must be a real number >= 1, got {0}")]
    InvalidP(f64),
    #[error("rank k = {k} outside [1, {max}]")]
    InvalidRank { k: usize, max: usize },
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("matrix data has {got} entries, expected {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("SVD did not converge within {sweeps} sweeps")]
    SvdFailure { sweeps: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is singular or too ill-conditioned (condition {condition:e})")]
    SingularMatrix { condition: f64 },
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("gradient vanishes: Ax = 0")]
    ZeroGradient,
    #[error("dimension {0} too small for this update (need d >= 2)")]
    DimensionTooSmall(usize),
    #[error("ellipsoid method did not converge within {cuts} cuts")]
    NoConvergence { cuts: usize, best: Box<Ellipsoid> },
}
