//! Nonlinear Landweber iteration with heuristic stopping rules.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: uniform grids, L² / H¹ pairings, Gram solves
//! - [`noise`], [`opnorm`]: seeded white noise and power-iteration norm estimates
//! - [`operator`]: the [`NonlinearProblem`] contract plus derivative and adjoint checks
//! - [`problems`]: Hammerstein, 1-D diffusion coefficient and auto-convolution operators
//! - [`landweber`]: the iteration and its paired `(k, 2k)` trace
//! - [`rules`]: HD, HR, QO, LS, the discrepancy principle and the optimal oracle
//! - [`diagnostics`]: Muckenhoupt / regularity constants, tangential-cone ratios, Jacobian SVD
//! - [`experiment`]: noise sweeps, CSV reports and summaries
//!
//! With the default `parallel` feature, independent work (sweep cells,
//! Jacobian columns, cone-ratio samples) is spread over a rayon pool. Without
//! it everything runs sequentially; results are identical either way.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod landweber;
pub mod noise;
pub mod operator;
pub mod opnorm;
pub mod par;
pub mod problems;
pub mod rules;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{h1_inner, l2_inner, Grid, GridFunction, InnerProductSpec, Layout, Space};
pub use landweber::{auto_stepsize, landweber_step, run_paired, IterationConfig, PairedTrace, Termination};
pub use operator::{adjoint_check, fd_derivative_check, operator_gates, Benchmark, DomainStatus, GateReport, NonlinearProblem};
pub use problems::problem_by_name;
pub use rules::{Rule, RuleDecision, SearchWindow};
