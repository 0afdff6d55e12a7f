#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Matrix files, synthetic data, evaluation reports and the `lplr` command
//! line on top of [`lplr_core`].

pub mod cli;
pub mod io;
pub mod report;
pub mod sweep;
pub mod synth;

pub use cli::run_cli;
pub use io::{load_matrix, store_matrix, Format, IoError};
pub use report::{compression_rate, evaluate, EvalReport, IterationCounts, ReportError};
pub use sweep::{sweep, SweepPlan};
pub use synth::{generate_synthetic, SpecError, SyntheticSpec};
