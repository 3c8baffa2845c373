//! Box-constrained QP solver whose iteration count is fixed in advance.
//!
//! [`ipm::solve`] runs a feasible full-Newton path-following interior-point
//! method that always performs exactly
//! `⌈log(2n/ε) / (−2 log(1 − 1/(4√(2n))))⌉ + 1` iterations, independent of
//! the problem data. [`mpc`] condenses an input-constrained linear MPC
//! problem into such box QPs and runs it in closed loop; [`oracle`] holds
//! independent reference solvers used for validation.

// NaN-rejecting comparisons are written as `!(a < b)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod ipm;
pub mod linalg;
pub mod mpc;
pub mod oracle;
pub mod table;

pub use error::{Error, Result};
pub use ipm::{certified_iterations, solve, BoxQp, Certificate, SolveResult};
pub use linalg::DenseMatrix;
