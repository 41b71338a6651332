//! Operator-norm estimation by power iteration on `A*A`.

use crate::error::Result;
use crate::grid::{GridFunction, InnerProductSpec};
use crate::noise::{rng, standard_normal};
use crate::operator::NonlinearProblem;

const START_SEED: u64 = 0x6f70_6e6f_726d;
const RESTARTS: usize = 3;

/// Estimates `‖A‖` for a linear map `A: X → Y` given its action and adjoint.
///
/// Runs power iteration on the self-adjoint `A*A` in the inner product of
/// `x_space`, stopping when the Rayleigh quotient changes by less than `tol`
/// (relative) or after `iters` iterations. A zero operator returns 0.
pub fn estimate_opnorm<F, G>(
    action: F,
    adjoint: G,
    x_space: &InnerProductSpec,
    iters: usize,
    tol: f64,
) -> Result<f64>
where
    F: Fn(&GridFunction) -> Result<GridFunction>,
    G: Fn(&GridFunction) -> Result<GridFunction>,
{
    let iters = iters.max(1);
    let grid = x_space.grid();
    let mut rng = rng(START_SEED, 0);
    'restart: for _ in 0..RESTARTS {
        let mut v = GridFunction::new(grid, x_space.space(), standard_normal(&mut rng, grid.len()))?;
        let norm = x_space.norm(&v)?;
        if norm == 0.0 {
            continue;
        }
        v = v.scaled(1.0 / norm);
        let mut lambda = 0.0_f64;
        for it in 0..iters {
            let w = adjoint(&action(&v)?)?;
            let next = x_space.inner(&v, &w)?;
            let w_norm = x_space.norm(&w)?;
            if w_norm == 0.0 {
                if it == 0 {
                    continue 'restart;
                }
                return Ok(next.max(0.0).sqrt());
            }
            let converged = it > 0 && (next - lambda).abs() <= tol * next.abs();
            lambda = next;
            if converged {
                break;
            }
            v = w.scaled(1.0 / w_norm);
        }
        return Ok(lambda.max(0.0).sqrt());
    }
    Ok(0.0)
}

/// `‖F′(x)‖` for a problem at linearization point `x`.
pub fn problem_opnorm(
    p: &dyn NonlinearProblem,
    x: &GridFunction,
    iters: usize,
    tol: f64,
) -> Result<f64> {
    estimate_opnorm(
        |h| p.derivative(x, h),
        |r| p.adjoint(x, r),
        p.domain(),
        iters,
        tol,
    )
}
