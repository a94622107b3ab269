//! Command-line front end: JSON run configs in, JSON reports and CSV time
//! series out.
//!
//! Exit codes: 0 success, 1 configuration or input error (nothing written),
//! 2 numerical failure, 3 failed assertion.

// negated comparisons are how NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::CliError;
