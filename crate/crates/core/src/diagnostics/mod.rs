//! Spectral diagnostics for explaining when a stopping rule can work.
//!
//! [`muckenhoupt_constant`] measures how far a data error is from smooth,
//! [`regularity_constant`] how well the residual filter sees the solution,
//! [`tcc_ratio`] samples the tangential-cone ratio, and [`jacobian_svd`]
//! supplies the singular systems the first two need.

mod spectral;
mod svd;
mod tcc;

pub use spectral::{
    muckenhoupt_constant, regularity_constant, Constant, ConstantReport, FilterSpec, SingularSystem,
};
pub use svd::{jacobian_svd, weighted_svd, JacobianSvd, MAX_DENSE_DIM, RANK_TOL};
pub use tcc::{tcc_ratio, TccReport, TCC_QUANTILES};
