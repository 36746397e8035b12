//! Residual evaluators for each field class and per-point reports.

pub mod pointwise;
pub mod report;

pub use pointwise::*;
pub use report::{classify, residual_report, residual_sample, Classification, ResidualKind, ResidualReport, NONZERO_TOL, ZERO_TOL};
