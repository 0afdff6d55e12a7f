//! Löwner-ellipsoid based ℓp low-rank approximation of dense matrices.
//!
//! The crate is `no_std` and only needs `alloc`. It provides
//!
//! * [`matrix`] / [`decomp`]: a small dense linear-algebra substrate
//!   (one-sided Jacobi SVD, Householder QR, Cholesky, inversion);
//! * [`lowner`]: an ellipsoid-method computation of the Löwner ellipsoid of
//!   the level set `{x : ‖Ax‖_p ≤ 1}`;
//! * [`lpsvd`]: the resulting ‖·‖p-SVD `A = U·D·Vᵀ`, both deterministic and via
//!   a sketching-based conditioner, plus an empirical sandwich check;
//! * [`factor`]: rank-k truncation, the ℓ2/SVD baseline, error bounds and
//!   the two-factor export used for compression.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod decomp;
mod error;
pub mod factor;
pub mod lowner;
pub mod lpsvd;
pub(crate) mod math;
pub mod matrix;
pub mod rng;
pub mod sketch;

pub use decomp::{cholesky, invert, invert_with_cap, qr, svd, Svd, DEFAULT_CONDITION_CAP};
pub use error::{Error, Result};
pub use factor::{
    assemble, error_bounds, l2_low_rank, lp_low_rank, orient, BoundPair, Iterations, LowRankConfig,
    Method, RankKApprox,
};
pub use lowner::{
    central_cut, contracted_vertices, lowner, shallow_cut, Contraction, CutRule, Ellipsoid,
    LevelSet, LownerConfig, LownerResult,
};
pub use lpsvd::{
    lp_svd, lp_svd_randomized, randomized_conditioner, sandwich_check, Conditioner,
    ConditionerConfig, LpSvd, LpSvdConfig, Sandwich,
};
pub use matrix::{entrywise_pnorm_pow, vector_pnorm, DenseMatrix, DiagMatrix};
pub use sketch::SketchKind;
