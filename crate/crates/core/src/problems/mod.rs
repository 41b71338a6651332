//! The shipped benchmark operators and their registry.

mod autoconv;
mod diffusion;
mod hammerstein;

pub use autoconv::{autoconv_apply, AutoConvolutionProblem};
pub use diffusion::{diffusion_solve, DiffusionProblem};
pub use hammerstein::{hammerstein_apply, HammersteinProblem};

use crate::error::{Error, Result};
use crate::operator::NonlinearProblem;

/// Registered problem names, in display order.
pub const PROBLEM_NAMES: [&str; 3] = ["hammerstein", "diffusion1d", "autoconv"];

/// Builds a registered problem, optionally overriding its grid size.
pub fn problem_by_name(name: &str, n: Option<usize>) -> Result<Box<dyn NonlinearProblem>> {
    Ok(match name {
        "hammerstein" => Box::new(HammersteinProblem::new(n.unwrap_or(128))?),
        "diffusion1d" => Box::new(DiffusionProblem::new(n.unwrap_or(50))?),
        "autoconv" => Box::new(AutoConvolutionProblem::new(n.unwrap_or(60))?),
        other => return Err(Error::UnknownProblem(other.to_string())),
    })
}

/// `count` logarithmically spaced values from `hi` down to `lo`.
pub fn log_levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                (hi.ln() + t * (lo.ln() - hi.ln())).exp()
            })
            .collect(),
    }
}
